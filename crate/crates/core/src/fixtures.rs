//! Hand-written programs used by tests, examples and the acceptance run.
//!
//! Every fixture parses in its language. Pairs carry their gold label; the
//! cross-language family is written so both sides standardize to the same
//! graph, while the semantic twins only share behavior.

use alloc::vec;
use alloc::vec::Vec;

use crate::ast::{Language, SourceUnit};
use crate::corpus::{CloneLabel, CloneType, PairExample};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixture {
    pub id: &'static str,
    pub language: Language,
    pub cluster: &'static str,
    pub text: &'static str,
}

impl Fixture {
    pub fn unit(&self) -> SourceUnit {
        SourceUnit::new(self.id, self.language, self.text, self.cluster)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixturePair {
    pub name: &'static str,
    pub a: Fixture,
    pub b: Fixture,
    pub label: CloneLabel,
    pub clone_type: Option<CloneType>,
}

impl FixturePair {
    pub fn example(&self) -> PairExample {
        let mut p = PairExample::new(self.a.id, self.b.id, self.label);
        p.clone_type = self.clone_type;
        p
    }
}

const fn py(id: &'static str, cluster: &'static str, text: &'static str) -> Fixture {
    Fixture {
        id,
        language: Language::Python,
        cluster,
        text,
    }
}

const fn java(id: &'static str, cluster: &'static str, text: &'static str) -> Fixture {
    Fixture {
        id,
        language: Language::Java,
        cluster,
        text,
    }
}

/// An assignment followed by a print of the assigned name.
pub const PRINT_NUM: Fixture = py("python/print_num.py", "print_num", "num = 5\nprint(\"hello\", num)\n");

pub const HELLO_PYTHON: Fixture = py("python/hello.py", "hello", "def hello(name):\n    print(\"hello, \" + name)\n");

pub const HELLO_JAVA: Fixture = java(
    "java/Hello.java",
    "hello",
    "public static void hello(String name) {\n    System.out.println(\"hello, \" + name);\n}\n",
);

/// Prints "A" for upper-case input, "a" otherwise.
pub const CASE_PRINT_1: Fixture = py(
    "python/case_print_1.py",
    "case_print",
    "S = input()\n\nif S.isupper():\n  print(\"A\")\nelse:\n  print(\"a\")\n",
);

pub const CASE_PRINT_2: Fixture = py(
    "python/case_print_2.py",
    "case_print",
    "alp=input()\n\nif alp==alp.upper():\n  print(\"A\")\nelif alp==alp.lower():\n  print(\"a\")\n",
);

/// `CASE_PRINT_1` with `S` renamed to `alp`.
pub const CASE_PRINT_RENAMED: Fixture = py(
    "python/case_print_renamed.py",
    "case_print",
    "alp = input()\n\nif alp.isupper():\n  print(\"A\")\nelse:\n  print(\"a\")\n",
);

pub fn hello_pair() -> FixturePair {
    FixturePair {
        name: "hello",
        a: HELLO_JAVA,
        b: HELLO_PYTHON,
        label: CloneLabel::Clone,
        clone_type: Some(CloneType::IV),
    }
}

/// Same behavior, different syntax: the motivating same-language pair.
pub fn case_print_pair() -> FixturePair {
    FixturePair {
        name: "case_print",
        a: CASE_PRINT_1,
        b: CASE_PRINT_2,
        label: CloneLabel::Clone,
        clone_type: Some(CloneType::IV),
    }
}

pub fn rename_pair() -> FixturePair {
    FixturePair {
        name: "case_print_rename",
        a: CASE_PRINT_1,
        b: CASE_PRINT_RENAMED,
        label: CloneLabel::Clone,
        clone_type: Some(CloneType::II),
    }
}

/// Java and Python programs written to standardize to identical graphs.
pub fn convergent_pairs() -> Vec<FixturePair> {
    let pair = |name, a, b| FixturePair {
        name,
        a,
        b,
        label: CloneLabel::Clone,
        clone_type: Some(CloneType::IV),
    };
    vec![
        hello_pair(),
        pair(
            "larger",
            java(
                "java/Larger.java",
                "larger",
                "static int larger(int a, int b) {\n    if (a > b) {\n        return a;\n    }\n    return b;\n}\n",
            ),
            py("python/larger.py", "larger", "def larger(a, b):\n    if a > b:\n        return a\n    return b\n"),
        ),
        pair(
            "countdown",
            java(
                "java/Countdown.java",
                "countdown",
                "static void countdown(int n) {\n    while (n > 0) {\n        System.out.println(n);\n        n = n - 1;\n    }\n}\n",
            ),
            py(
                "python/countdown.py",
                "countdown",
                "def countdown(n):\n    while n > 0:\n        print(n)\n        n = n - 1\n",
            ),
        ),
        pair(
            "total",
            java(
                "java/Total.java",
                "total",
                "static int total(int n) {\n    int s = 0;\n    int i = 1;\n    while (i <= n) {\n        s += i;\n        i += 1;\n    }\n    return s;\n}\n",
            ),
            py(
                "python/total.py",
                "total",
                "def total(n):\n    s = 0\n    i = 1\n    while i <= n:\n        s += i\n        i += 1\n    return s\n",
            ),
        ),
        pair(
            "clamp",
            java(
                "java/Clamp.java",
                "clamp",
                "public static int clamp(int x, int lo, int hi) {\n    return Math.max(lo, Math.min(x, hi));\n}\n",
            ),
            py("python/clamp.py", "clamp", "def clamp(x, lo, hi):\n    return max(lo, min(x, hi))\n"),
        ),
    ]
}

/// Cross-language twins that share behavior but not structure.
pub fn semantic_twins() -> Vec<FixturePair> {
    let pair = |name, a, b| FixturePair {
        name,
        a,
        b,
        label: CloneLabel::Clone,
        clone_type: Some(CloneType::IV),
    };
    vec![
        pair(
            "factorial",
            java(
                "java/Factorial.java",
                "factorial",
                "static long factorial(int n) {\n    long r = 1;\n    for (int i = 2; i <= n; i++) {\n        r = r * i;\n    }\n    return r;\n}\n",
            ),
            py(
                "python/factorial.py",
                "factorial",
                "def factorial(n):\n    r = 1\n    for i in range(1, n + 1):\n        r *= i\n    return r\n",
            ),
        ),
        pair(
            "count_even",
            java(
                "java/CountEven.java",
                "count_even",
                "static int countEven(int[] xs) {\n    int c = 0;\n    for (int x : xs) {\n        if (x % 2 == 0) {\n            c++;\n        }\n    }\n    return c;\n}\n",
            ),
            py(
                "python/count_even.py",
                "count_even",
                "def count_even(xs):\n    c = 0\n    for x in xs:\n        if x % 2 == 0:\n            c += 1\n    return c\n",
            ),
        ),
        pair(
            "case_print_cross",
            java(
                "java/CasePrint.java",
                "case_print",
                "public static void main(String[] args) {\n    Scanner sc = new Scanner(System.in);\n    String s = sc.next();\n    if (s.equals(s.toUpperCase())) {\n        System.out.println(\"A\");\n    } else {\n        System.out.println(\"a\");\n    }\n}\n",
            ),
            CASE_PRINT_1,
        ),
    ]
}

/// Same-language clone pairs whose differences are all syntactic noise
/// (modifiers, declared types, parentheses, increment spelling).
pub fn curated_pairs() -> Vec<FixturePair> {
    vec![
        FixturePair {
            name: "array_max",
            a: java(
                "java/ArrayMax1.java",
                "array_max",
                "public static int max(int[] values) {\n    int best = values[0];\n    for (int i = 1; i < values.length; i++) {\n        if (values[i] > best) {\n            best = values[i];\n        }\n    }\n    return best;\n}\n",
            ),
            b: java(
                "java/ArrayMax2.java",
                "array_max",
                "private static final long largest(final long[] arr) throws IllegalArgumentException {\n    long m = (arr[0]);\n    for (int k = 1; (k < arr.length); ++k) {\n        if ((arr[k] > m)) {\n            m = (arr[k]);\n        }\n    }\n    return (m);\n}\n",
            ),
            label: CloneLabel::Clone,
            clone_type: Some(CloneType::III),
        },
        FixturePair {
            name: "mean",
            a: py(
                "python/mean1.py",
                "mean",
                "def mean(xs):\n    total = 0\n    for x in xs:\n        total = total + x\n    return total / len(xs)\n",
            ),
            b: py(
                "python/mean2.py",
                "mean",
                "def average(values):\n    # running sum\n    s = (0)\n    for v in (values):\n        s = (s + v)\n    return (s / len(values))\n",
            ),
            label: CloneLabel::Clone,
            clone_type: Some(CloneType::II),
        },
    ]
}

/// Two unrelated readers that share most of their vocabulary.
pub fn false_positive_pair() -> FixturePair {
    FixturePair {
        name: "reader_false_positive",
        a: java(
            "java/PhoneDurations.java",
            "phone_durations",
            r#"public PhoneDurationsImpl(URL url) throws IOException {
    BufferedReader reader;
    String line;
    phoneDurations = new HashMap();
    reader = new BufferedReader(new InputStreamReader(url.openStream()));
    line = reader.readLine();
    while (line != null) {
        if (!line.startsWith("***")) {
            parseAndAdd(line);
        }
        line = reader.readLine();
    }
    reader.close();
}
"#,
        ),
        b: java(
            "java/GlobalIp.java",
            "global_ip",
            r#"public static String getMyGlobalIP() {
    try {
        URL url = new URL(IPSERVER);
        HttpURLConnection con = (HttpURLConnection) url.openConnection();
        BufferedReader in = new BufferedReader(new InputStreamReader(con.getInputStream()));
        String ip = in.readLine();
        in.close();
        con.disconnect();
        return ip;
    } catch (Exception e) {
        return null;
    }
}
"#,
        ),
        label: CloneLabel::NotClone,
        clone_type: None,
    }
}

/// Every distinct fixture program.
pub fn all_fixtures() -> Vec<Fixture> {
    let mut out = vec![PRINT_NUM, CASE_PRINT_1, CASE_PRINT_2, CASE_PRINT_RENAMED];
    let pairs = convergent_pairs()
        .into_iter()
        .chain(semantic_twins())
        .chain(curated_pairs())
        .chain([false_positive_pair()]);
    for p in pairs {
        for f in [p.a, p.b] {
            if !out.iter().any(|o| o.id == f.id) {
                out.push(f);
            }
        }
    }
    out
}
