//! Planted synthetic snapshot with known campaigns, shared by integration
//! tests and benches.

#![allow(dead_code)]

pub mod gen;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, TimeZone, Utc};
use onionforge_core::chain::{Satoshi, Transaction, TxIo, Txid};
use onionforge_core::corpus::{export_snapshot, Corpus, OnionDomain, PageRecord};
use onionforge_core::extract::base58::encode_check;
use sha2::{Digest, Sha256};

/// Deterministic valid P2PKH address for a seed string.
pub fn addr(seed: &str) -> String {
    let h = Sha256::digest(seed.as_bytes());
    let mut payload = vec![0u8];
    payload.extend_from_slice(&h[..20]);
    encode_check(&payload)
}

pub const A1: &str = "deepmarket2abcde.onion";
pub const A2: &str = "deepmarqx4rs5tuv.onion";
pub const A3: &str = "armsdepotz7qwert.onion";
pub const B1: &str = "hackzonekp3mnbvc.onion";
pub const B2: &str = "cardshopq2w3e4r5.onion";
pub const C1: &str = "doubleyourbtc234.onion";
pub const C2: &str = "investprofit5677.onion";
pub const SHOP: &str = "megastorexyz2345.onion";
pub const WIKI: &str = "wikihubaaaa23456.onion";
pub const PILLS: &str = "pillsonlinezz234.onion";

/// Ground-truth-only sites so every category has a reference document.
pub const REFERENCE: [(&str, &str, &str); 7] = [
    (
        "refprivkey234567.onion",
        "PrivateKey",
        "Electrum wallet private keys with balance, privkey accounts for sale at a low price.",
    ),
    (
        "refbills2345abcd.onion",
        "CounterfeitBills",
        "Counterfeit euro and usd bills, dollar notes of any value shipped fast.",
    ),
    (
        "refcitizen234567.onion",
        "Citizenship",
        "Citizenship records with dateofbirth, birthcity, addresscity and passport scans.",
    ),
    (
        "refhitmen2345abc.onion",
        "Hitmen",
        "Hitmen provide murder services; send the target profile and identifying information.",
    ),
    (
        "refabuse23456abc.onion",
        "SexualAbuse",
        "Forbidden video archive, film collection and private streams online.",
    ),
    (
        "refmember234567a.onion",
        "Memberships",
        "Membership access levels: deposit payment, authorization page and pin creation.",
    ),
    (
        "refshop234567abc.onion",
        "Shop",
        "Hidden marketplace index for tor hosting, credit cards and every onion service.",
    ),
];

pub const BRIDGE_EMAIL: &str = "ops@protonmail.com";
pub const BRIDGE_IP: &str = "203.0.113.7";
pub const URL_C1: &str = "https://blog-c.example/posts/1";
pub const URL_C2: &str = "https://forum-c.example/thread/9";

pub struct Names {
    pub a1: String,
    pub a2: String,
    pub a3: String,
    pub b1: String,
    pub b2: String,
    pub c1: String,
    pub c2: String,
    pub s1: String,
    pub forum: String,
    pub wiki: String,
}

pub fn names() -> Names {
    Names {
        a1: addr("a1"),
        a2: addr("a2"),
        a3: addr("a3"),
        b1: addr("b1"),
        b2: addr("b2"),
        c1: addr("c1"),
        c2: addr("c2"),
        s1: addr("s1"),
        forum: addr("forum"),
        wiki: addr("wiki"),
    }
}

/// What the planted run must produce.
pub struct Expected {
    /// Campaigns in rank order (received desc).
    pub campaigns: Vec<ExpectedCampaign>,
    pub single_day_address: String,
    pub single_day_received: Satoshi,
    pub shop_site: String,
    pub vanity_pair: (String, String),
    pub removed_address: String,
    pub mixing_txid: String,
}

pub struct ExpectedCampaign {
    pub sites: BTreeSet<String>,
    pub btc: BTreeSet<String>,
    pub emails: BTreeSet<String>,
    pub ips: BTreeSet<String>,
    pub received: Satoshi,
}

pub struct Planted {
    pub dir: PathBuf,
    pub config: PathBuf,
    pub expected: Expected,
}

const DRUGS: &str =
    "Buy cocaine heroin mdma pills weed cannabis with worldwide stealth shipping from our trusted vendor.";
const WEAPONS: &str = "Glock pistols rifles ammunition and handguns shipped discreetly with serial numbers removed.";
const HACKER: &str =
    "Hire a professional hacker for account recovery, ddos attacks, phone hacking and database breaches.";
const CARDS: &str = "Cloned credit cards with high balance, dumps with pin, cashout guaranteed at any atm worldwide.";
const SCAM: &str = "Double your bitcoin in 24 hours. Send any amount and our investment program returns double profit.";
const WIKI_TEXT: &str = "A community directory of hidden services, news links and privacy guides for new readers.";

fn page(domain: &str, path: &str, title: &str, body: &str, extra: &[&str]) -> PageRecord {
    let mut html = format!("<html><head><title>{title}</title></head><body><h1>{title}</h1><p>{body}</p>");
    for e in extra {
        html.push_str(&format!("<p>{e}</p>"));
    }
    html.push_str("</body></html>");
    PageRecord {
        domain: OnionDomain::parse(domain).unwrap(),
        path: path.to_string(),
        html: html.into_bytes(),
        fetched_at: Utc.with_ymd_and_hms(2020, 6, 1, 12, 0, 0).unwrap(),
    }
}

fn ts(month: u32, day: u32, hour: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, month, day, hour, 0, 0).unwrap()
}

fn tx(n: u32, at: DateTime<Utc>, ins: &[(&str, Satoshi)], outs: &[(&str, Satoshi)]) -> Transaction {
    let io = |v: &[(&str, Satoshi)]| {
        v.iter()
            .map(|(a, s)| TxIo {
                address: a.to_string(),
                value: *s,
            })
            .collect()
    };
    Transaction {
        txid: Txid::parse(&format!("{n:064x}")).unwrap(),
        timestamp: at,
        coinbase: false,
        inputs: io(ins),
        outputs: io(outs),
    }
}

fn set<const N: usize>(v: [&str; N]) -> BTreeSet<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn write_jsonl<T: serde::Serialize>(path: &Path, rows: &[T]) {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r).unwrap());
        s.push('\n');
    }
    std::fs::write(path, s).unwrap();
}

/// Write the planted snapshot, ground truth, fixtures and a run config
/// into `dir`. `output_dir` is relative to `dir`.
pub fn write_planted(dir: &Path, output_dir: &str) -> Planted {
    let n = names();
    let x = |s: &str| addr(&format!("outsider-{s}"));

    let pages = vec![
        page(
            A1,
            "/",
            "Deep Market",
            DRUGS,
            &[&format!("Pay to {}", n.a1), &format!("Donations {}", n.forum)],
        ),
        page(
            A2,
            "/",
            "Deep Market Mirror",
            DRUGS,
            &[&format!("Send BTC: {} or {}", n.a1, n.a2)],
        ),
        page(A3, "/", "Arms Depot", WEAPONS, &[&format!("Payment address {}", n.a3)]),
        page(
            B1,
            "/",
            "Hack Zone",
            HACKER,
            &[
                &format!("Wallet {}", n.b1),
                &format!("Contact {BRIDGE_EMAIL}"),
                &format!("Forum tip jar {}", n.forum),
            ],
        ),
        page(
            B2,
            "/",
            "Card Shop",
            CARDS,
            &[&format!("Wallet {}", n.b2), &format!("Support: {BRIDGE_EMAIL}")],
        ),
        page(C1, "/", "Double Your BTC", SCAM, &[&format!("Send to {}", n.c1)]),
        page(C2, "/", "Invest Profit", SCAM, &[&format!("Deposit {}", n.c2)]),
        page(SHOP, "/", "Mega Store", DRUGS, &[&format!("Checkout {}", n.s1)]),
        page(SHOP, "/guns", "Mega Store Guns", WEAPONS, &[]),
        page(WIKI, "/", "Wiki Hub", WIKI_TEXT, &[&format!("Support us {}", n.wiki)]),
        page(PILLS, "/", "Pills Online", DRUGS, &[]),
    ];
    let mut pages = pages;
    for (d, _, text) in REFERENCE {
        pages.push(page(d, "/", "Reference", text, &[]));
    }
    let (corpus, warnings) = Corpus::from_pages(pages);
    assert!(warnings.is_empty());
    let snap = dir.join("snapshot");
    export_snapshot(&corpus, &snap).unwrap();

    let gt = vec![
        (A1, "/", "Drugs"),
        (A2, "/", "Drugs"),
        (A3, "/", "Weapons"),
        (B1, "/", "Hacker"),
        (B2, "/", "CloneCard"),
        (C1, "/", "InvestmentScams"),
        (C2, "/", "InvestmentScams"),
        (SHOP, "/", "Drugs"),
        (SHOP, "/guns", "Weapons"),
        (WIKI, "/", "Other"),
    ];
    let gt: Vec<_> = gt
        .into_iter()
        .chain(REFERENCE.iter().map(|(d, c, _)| (*d, "/", *c)))
        .map(|(d, p, c)| serde_json::json!({"domain": d, "path": p, "category": c}))
        .collect();
    write_jsonl(&dir.join("ground_truth.jsonl"), &gt);

    let ann = vec![
        serde_json::json!({"domain": A1, "address": n.forum, "zone": "forum", "note": "forum donation"}),
        serde_json::json!({"domain": B1, "address": n.forum, "zone": "forum"}),
        serde_json::json!({"domain": A1, "address": n.a1, "zone": "payment"}),
    ];
    write_jsonl(&dir.join("address_annotations.jsonl"), &ann);

    let (x1, x2, x3, x4, x5) = (x("1"), x("2"), x("3"), x("4"), x("5"));
    let (x6, x7, x8, x9) = (x("6"), x("7"), x("8"), x("9"));
    let (y1, y2, y3) = (x("y1"), x("y2"), x("y3"));
    let (x10, x11, x12) = (x("10"), x("11"), x("12"));
    let mixing = tx(
        10,
        ts(4, 1, 0),
        &[(&n.b1, 500_000), (&n.c1, 600_000), (&x9, 700_000)],
        &[(&y1, 550_000), (&y2, 550_000), (&y3, 550_000)],
    );
    let txs = vec![
        tx(
            1,
            ts(1, 1, 10),
            &[(&x1, 1_000_000)],
            &[(&n.a1, 600_000), (&x1, 390_000)],
        ),
        tx(2, ts(1, 3, 10), &[(&x2, 300_000)], &[(&n.a2, 250_000), (&x2, 40_000)]),
        tx(3, ts(1, 9, 10), &[(&n.a2, 100_000), (&n.a3, 50_000)], &[(&x3, 140_000)]),
        tx(
            4,
            ts(1, 10, 10),
            &[(&n.a1, 300_000)],
            &[(&n.a2, 200_000), (&n.a1, 90_000)],
        ),
        tx(5, ts(2, 2, 10), &[(&x4, 80_000)], &[(&n.a3, 75_000)]),
        tx(6, ts(2, 5, 10), &[(&x5, 1_300_000)], &[(&n.b1, 1_200_000)]),
        tx(7, ts(2, 7, 10), &[(&x6, 400_000)], &[(&n.b2, 300_000)]),
        tx(8, ts(3, 1, 10), &[(&x7, 41_000_000)], &[(&n.c1, 40_000_000)]),
        tx(9, ts(3, 2, 10), &[(&x8, 6_000_000)], &[(&n.c2, 5_000_000)]),
        mixing.clone(),
        tx(11, ts(3, 5, 1), &[(&x10, 20_000)], &[(&n.s1, 10_000)]),
        tx(12, ts(3, 5, 22), &[(&x11, 30_000)], &[(&n.s1, 20_000)]),
        tx(13, ts(3, 6, 1), &[(&x12, 99_000)], &[(&n.forum, 90_000)]),
    ];
    let ledgers = dir.join("ledgers");
    std::fs::create_dir_all(&ledgers).unwrap();
    for a in [&n.a1, &n.a2, &n.a3, &n.b1, &n.b2, &n.c1, &n.c2, &n.s1, &n.forum] {
        let mine: Vec<&Transaction> = txs.iter().filter(|t| t.involves(a)).collect();
        std::fs::write(
            ledgers.join(format!("{a}.json")),
            serde_json::to_string_pretty(&mine).unwrap(),
        )
        .unwrap();
    }

    let search = dir.join("search");
    std::fs::create_dir_all(&search).unwrap();
    let explorer = |a: &str| format!("https://www.blockchain.com/btc/address/{a}");
    std::fs::write(
        search.join(format!("{}.json", n.c1)),
        serde_json::to_string(&[URL_C1.to_string(), explorer(&n.c1)]).unwrap(),
    )
    .unwrap();
    std::fs::write(
        search.join(format!("{}.json", n.c2)),
        serde_json::to_string(&[URL_C2.to_string(), explorer(&n.c2)]).unwrap(),
    )
    .unwrap();
    let trace_ann = vec![
        serde_json::json!({"url": URL_C1, "kind": "abuse-report", "ip": BRIDGE_IP}),
        serde_json::json!({"url": URL_C2, "kind": "illicit-site", "ip": BRIDGE_IP, "registrant": "J. Doe"}),
    ];
    write_jsonl(&dir.join("trace_annotations.jsonl"), &trace_ann);

    let config = dir.join("run.toml");
    std::fs::write(
        &config,
        format!(
            "corpus_root = \"snapshot\"\n\
             ground_truth = \"ground_truth.jsonl\"\n\
             output_dir = \"{output_dir}\"\n\
             threshold = 0.5\n\
             provider = \"fixtures\"\n\
             ledger_fixtures = \"ledgers\"\n\
             rate_limit = 0\n\
             address_annotations = \"address_annotations.jsonl\"\n\
             search_provider = \"fixtures\"\n\
             search_fixtures = \"search\"\n\
             trace_annotations = \"trace_annotations.jsonl\"\n\
             public_threshold = 50\n\
             vanity_prefix_len = 7\n"
        ),
    )
    .unwrap();

    let expected = Expected {
        campaigns: vec![
            ExpectedCampaign {
                sites: set([C1, C2]),
                btc: set([&n.c1, &n.c2]),
                emails: BTreeSet::new(),
                ips: set([BRIDGE_IP]),
                received: 45_000_000,
            },
            ExpectedCampaign {
                sites: set([B1, B2]),
                btc: set([&n.b1, &n.b2]),
                emails: set([BRIDGE_EMAIL]),
                ips: BTreeSet::new(),
                received: 1_500_000,
            },
            ExpectedCampaign {
                sites: set([A1, A2, A3]),
                btc: set([&n.a1, &n.a2, &n.a3]),
                emails: BTreeSet::new(),
                ips: BTreeSet::new(),
                received: 925_000,
            },
        ],
        single_day_address: n.s1.clone(),
        single_day_received: 30_000,
        shop_site: SHOP.to_string(),
        vanity_pair: (A1.to_string(), A2.to_string()),
        removed_address: n.forum.clone(),
        mixing_txid: mixing.txid.to_string(),
    };
    Planted {
        dir: dir.to_path_buf(),
        config,
        expected,
    }
}

/// Every file under `dir` except run bookkeeping with timestamps, keyed
/// by relative path.
pub fn snapshot_outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, d: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                let rel = p.strip_prefix(base).unwrap().to_string_lossy().into_owned();
                if rel != "run.json" {
                    out.insert(rel, std::fs::read(&p).unwrap());
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}
