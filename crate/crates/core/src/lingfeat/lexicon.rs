//! Word lists for the rule-based annotators (English, Spanish, Italian).

use std::collections::{HashMap, HashSet};
use std::sync::LazyLock;

pub(crate) struct Lexicon {
    pub stopwords: HashSet<&'static str>,
    pub first_person: HashSet<&'static str>,
    pub positive: HashSet<&'static str>,
    pub negative: HashSet<&'static str>,
    pub determiners: HashSet<&'static str>,
    pub adpositions: HashSet<&'static str>,
    pub pronouns: HashSet<&'static str>,
    pub conjunctions: HashSet<&'static str>,
    pub particles: HashSet<&'static str>,
    pub auxiliaries: HashSet<&'static str>,
    pub verb_suffixes: &'static [&'static str],
    pub adj_suffixes: &'static [&'static str],
    pub adv_suffixes: &'static [&'static str],
    /// Lowercased multi-word names; matched on token sequences.
    pub locations: Vec<Vec<&'static str>>,
    pub organizations: Vec<Vec<&'static str>>,
}

fn set(words: &'static str) -> HashSet<&'static str> {
    words.split_whitespace().collect()
}

fn names(list: &'static [&'static str]) -> Vec<Vec<&'static str>> {
    let mut v: Vec<Vec<&str>> = list.iter().map(|n| n.split(' ').collect()).collect();
    // longest first so that "new york city" wins over "new york"
    v.sort_by_key(|n| std::cmp::Reverse(n.len()));
    v
}

const SHARED_LOCATIONS: &[&str] = &[
    "chile", "ecuador", "italy", "italia", "spain", "españa", "mexico", "méxico", "nepal",
    "haiti", "japan", "philippines", "pakistan", "india", "texas", "colorado", "alberta",
    "queensland", "boston", "new york", "california", "venezuela", "guatemala", "peru", "perú",
    "santiago", "valparaíso", "valparaiso", "iquique", "quito", "guayaquil", "manta",
    "portoviejo", "esmeraldas", "genova", "genoa", "sardegna", "sardinia", "emilia",
    "emilia romagna", "modena", "bologna", "ferrara", "roma", "rome", "milano", "milan",
    "napoli", "naples", "torino", "venezia", "amatrice", "norcia", "madrid", "barcelona",
    "sevilla", "valencia", "lima", "bogotá", "bogota", "caracas", "manila", "kathmandu",
    "tokyo", "london", "paris", "calabria", "sicilia", "sicily", "liguria", "toscana",
    "beirut", "tianjin",
];

const SHARED_ORGS: &[&str] = &[
    "red cross", "cruz roja", "croce rossa", "fema", "unicef", "onu", "un", "who", "oms",
    "usgs", "onemi", "protezione civile", "protección civil", "proteccion civil", "bomberos",
    "vigili del fuoco", "ingv", "noaa", "nasa", "cnn", "bbc", "reuters", "carabineros",
    "policía nacional", "polizia", "carabinieri", "salvation army", "caritas", "msf",
    "world food programme", "ejército", "esercito",
];

static EN: LazyLock<Lexicon> = LazyLock::new(|| Lexicon {
    stopwords: set(
        "a an the and or but if of at by for with about against between into through during before \
         after above below to from up down in out on off over under again further then once here there \
         when where why how all any both each few more most other some such no nor not only own same so \
         than too very s t can will just don should now i me my myself we our ours ourselves you your \
         yours he him his she her hers it its they them their what which who whom this that these those \
         am is are was were be been being have has had having do does did doing would could",
    ),
    first_person: set("i me my mine myself we us our ours ourselves i'm i've i'd i'll we're we've"),
    positive: set(
        "safe good great thanks thank grateful love hope hopeful help helping rescued rescue survived \
         survivor survivors relief support supporting praying pray prayers strong brave heroes hero \
         amazing wonderful happy glad fine okay ok better best beautiful kind care caring volunteer \
         volunteers donate donated donation donations recovered restored reopened congratulations",
    ),
    negative: set(
        "dead death deaths died dies killed kill injured hurt damage damaged destroyed destruction \
         collapse collapsed disaster tragedy tragic terrible horrible awful scary scared fear afraid \
         panic sad sorry missing trapped lost loss victims victim emergency danger dangerous worst bad \
         crisis chaos fire burning flooded flooding toxic evacuate evacuated homeless hate angry \
         devastating devastated suffering pain cry crying",
    ),
    determiners: set("a an the this that these those my your his her its our their some any every each no all both either neither"),
    adpositions: set("of in on at by for with about against between into through during before after above below to from up down over under near across along around behind beyond within without"),
    pronouns: set("i me you he him she her it we us they them myself yourself himself herself itself ourselves themselves who whom whose which what someone anyone everyone nobody something anything everything nothing mine yours ours theirs"),
    conjunctions: set("and or but nor yet so because although though while whereas if unless since whether"),
    particles: set("not n't to up off out 's 'll 've 're 'd"),
    auxiliaries: set("is am are was were be been being have has had do does did will would shall should can could may might must"),
    verb_suffixes: &["ing", "ed", "ize", "ise", "ify", "ate"],
    adj_suffixes: &["ous", "ful", "able", "ible", "ive", "less", "ical", "ish", "ic", "al"],
    adv_suffixes: &["ly"],
    locations: names(SHARED_LOCATIONS),
    organizations: names(SHARED_ORGS),
});

static ES: LazyLock<Lexicon> = LazyLock::new(|| Lexicon {
    stopwords: set(
        "de la que el en y a los del se las por un para con no una su al lo como más pero sus le ya o \
         este sí porque esta entre cuando muy sin sobre también me hasta hay donde quien desde todo nos \
         durante todos uno les ni contra otros ese eso ante ellos e esto mí antes algunos qué unos yo \
         otro otras otra él tanto esa estos mucho quienes nada muchos cual poco ella estar estas algunas \
         algo nosotros mi mis tú te ti tu tus ellas nosotras vosotros os es son fue era está están",
    ),
    first_person: set("yo me mi mis mío mía míos mías nosotros nosotras nos nuestro nuestra nuestros nuestras conmigo"),
    positive: set(
        "bien bueno buena buenos buenas gracias feliz felices amor esperanza ayuda ayudar ayudando \
         rescatado rescatada rescatados rescate sobreviviente sobrevivientes salvo salvos salvados \
         apoyo fuerza fuerzas héroe héroes increíble maravilloso hermoso mejor tranquilo tranquilos \
         voluntario voluntarios donación donaciones solidaridad unidos ánimo orgulloso",
    ),
    negative: set(
        "muerto muertos muerta muertas muerte murió fallecido fallecidos herido heridos daño daños \
         dañado destruido destrucción derrumbe derrumbó colapso desastre tragedia terrible horrible \
         miedo pánico triste desaparecido desaparecidos atrapado atrapados perdido pérdida víctima \
         víctimas emergencia peligro peligroso peor malo mala crisis caos incendio fuego inundado \
         inundación tóxico evacuar evacuados damnificados dolor llorar rabia",
    ),
    determiners: set("el la los las un una unos unas este esta estos estas ese esa esos esas aquel aquella mi mis tu tus su sus nuestro nuestra nuestros nuestras todo toda todos todas cada algún alguna algunos algunas ningún ninguna lo"),
    adpositions: set("a ante bajo con contra de desde durante en entre hacia hasta mediante para por según sin sobre tras al del"),
    pronouns: set("yo tú él ella nosotros nosotras vosotros ellos ellas me te se nos os le les lo la los las mí ti sí conmigo quien quienes alguien nadie algo nada usted ustedes"),
    conjunctions: set("y e o u pero sino ni que porque aunque si pues mientras cuando como"),
    particles: set("no sí ya"),
    auxiliaries: set("es son fue fueron era eran está están estaba estaban ha han había habían ser estar haber hay"),
    verb_suffixes: &["ando", "iendo", "ado", "ido", "aron", "ieron", "ar", "er", "ir", "ó", "amos", "emos", "imos"],
    adj_suffixes: &["oso", "osa", "osos", "osas", "able", "ible", "ante", "ente", "ivo", "iva", "al"],
    adv_suffixes: &["mente"],
    locations: names(SHARED_LOCATIONS),
    organizations: names(SHARED_ORGS),
});

static IT: LazyLock<Lexicon> = LazyLock::new(|| Lexicon {
    stopwords: set(
        "di a da in con su per tra fra il lo la i gli le un uno una e ed o ma se che non più come anche \
         del dello della dei degli delle al allo alla ai agli alle dal dallo dalla dai dagli dalle nel \
         nello nella nei negli nelle sul sullo sulla sui sugli sulle questo questa questi queste quello \
         quella quelli quelle io tu lui lei noi voi loro mi ti ci vi si è sono era erano ha hanno ho \
         c'è ci sono mio mia miei mie tuo tua suo sua nostro nostra molto tutto tutti",
    ),
    first_person: set("io me mi mio mia miei mie noi ci nostro nostra nostri nostre"),
    positive: set(
        "bene buono buona buoni buone grazie felice felici amore speranza aiuto aiutare aiutando \
         salvato salvata salvati salvo salvi soccorso sopravvissuto sopravvissuti sostegno forza \
         eroe eroi incredibile meraviglioso bellissimo bello bella migliore tranquilli volontario \
         volontari donazione donazioni solidarietà uniti coraggio orgoglioso",
    ),
    negative: set(
        "morto morti morta morte deceduto deceduti ferito feriti danno danni danneggiato distrutto \
         distruzione crollo crollato crollata disastro tragedia terribile orribile paura panico triste \
         disperso dispersi intrappolato intrappolati perso perdita vittima vittime emergenza pericolo \
         pericoloso peggio peggiore male crisi caos incendio fuoco allagato alluvione tossico evacuare \
         evacuati sfollati dolore piangere rabbia",
    ),
    determiners: set("il lo la i gli le l' un uno una un' questo questa questi queste quel quello quella quei quegli quelle mio mia miei mie tuo tua suo sua nostro nostra loro ogni ogni alcuni alcune nessun nessuna tutto tutta tutti tutte"),
    adpositions: set("di a da in con su per tra fra del dello della dei degli delle al allo alla ai agli alle dal dalla dai dalle nel nello nella nei negli nelle sul sulla sui sulle verso senza sopra sotto dopo prima durante contro"),
    pronouns: set("io tu lui lei noi voi loro mi ti si ci vi lo la li le gli ne me te sé chi qualcuno nessuno qualcosa niente nulla"),
    conjunctions: set("e ed o oppure ma però che perché se quando mentre anche né come quindi dunque"),
    particles: set("non sì già"),
    auxiliaries: set("è sono era erano sarà essere stato stata stati ha hanno ho hai abbiamo avere aveva avevano c'è"),
    verb_suffixes: &["ando", "endo", "ato", "ata", "ati", "ate", "uto", "ito", "are", "ere", "ire", "ano", "ono", "iamo"],
    adj_suffixes: &["oso", "osa", "osi", "ose", "bile", "bili", "ante", "ente", "ivo", "iva", "ale"],
    adv_suffixes: &["mente"],
    locations: names(SHARED_LOCATIONS),
    organizations: names(SHARED_ORGS),
});

static BY_LANG: LazyLock<HashMap<&'static str, &'static Lexicon>> =
    LazyLock::new(|| HashMap::from([("en", &*EN), ("es", &*ES), ("it", &*IT)]));

pub(crate) fn lexicon(language: &str) -> Option<&'static Lexicon> {
    BY_LANG.get(language).copied()
}
