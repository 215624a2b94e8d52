//! Random inputs and brute-force oracles.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::net::{IpAddr, Ipv4Addr};

use chrono::{TimeZone, Utc};
use onionforge_core::chain::{AddressLedger, IllicitAddressSet, Satoshi, Transaction, TxIo, Txid};
use onionforge_core::classify::{Category, GroundTruthRow, LabelPhase, SiteLabel};
use onionforge_core::cluster::{ClusterInput, NodeId, NodeKind, SiteEmail};
use onionforge_core::corpus::{Corpus, OnionDomain, PageRecord};
use onionforge_core::extract::BtcAddress;
use onionforge_core::trace::SurfaceLink;
use rand::seq::SliceRandom;
use rand::Rng;

use super::addr;

const B32: &[u8] = b"abcdefghijklmnopqrstuvwxyz234567";

pub fn onion<R: Rng>(rng: &mut R) -> OnionDomain {
    let s: String = (0..16).map(|_| B32[rng.gen_range(0..32)] as char).collect();
    OnionDomain::parse(&format!("{s}.onion")).unwrap()
}

pub fn btc(seed: &str) -> BtcAddress {
    BtcAddress::parse(&addr(seed)).unwrap()
}

pub fn txid(n: u64) -> Txid {
    Txid::parse(&format!("{n:064x}")).unwrap()
}

pub fn ledger_of(address: &BtcAddress, txs: &[Transaction]) -> AddressLedger {
    let a = address.as_str();
    let mine: Vec<Transaction> = txs.iter().filter(|t| t.involves(a)).cloned().collect();
    let received = mine.iter().map(|t| t.received_by(a)).sum();
    let sent = mine.iter().map(|t| t.sent_by(a)).sum();
    AddressLedger {
        address: address.clone(),
        first_seen: mine.iter().map(|t| t.timestamp).min(),
        last_seen: mine.iter().map(|t| t.timestamp).max(),
        transactions: mine,
        received,
        sent,
        balance: received.saturating_sub(sent),
    }
}

fn io(list: &[(String, Satoshi)]) -> Vec<TxIo> {
    list.iter()
        .map(|(a, v)| TxIo {
            address: a.clone(),
            value: *v,
        })
        .collect()
}

pub fn make_tx(n: u64, ins: &[(String, Satoshi)], outs: &[(String, Satoshi)]) -> Transaction {
    Transaction {
        txid: txid(n),
        timestamp: Utc.timestamp_opt(1_577_836_800 + n as i64 * 3_600, 0).unwrap(),
        coinbase: false,
        inputs: io(ins),
        outputs: io(outs),
    }
}

/// Owned counterpart of [`ClusterInput`].
#[derive(Debug, Clone)]
pub struct OwnedInput {
    pub labels: Vec<SiteLabel>,
    pub illicit: IllicitAddressSet,
    pub ledgers: Vec<AddressLedger>,
    pub emails: Vec<SiteEmail>,
    pub surface: Vec<SurfaceLink>,
    pub txs: Vec<Transaction>,
}

impl OwnedInput {
    pub fn view(&self) -> ClusterInput<'_> {
        ClusterInput {
            labels: &self.labels,
            illicit: &self.illicit,
            ledgers: &self.ledgers,
            emails: &self.emails,
            surface: &self.surface,
        }
    }

    /// Same content, every list in a new order.
    pub fn shuffled<R: Rng>(&self, rng: &mut R) -> OwnedInput {
        let mut o = self.clone();
        o.labels.shuffle(rng);
        o.ledgers.shuffle(rng);
        for l in &mut o.ledgers {
            l.transactions.shuffle(rng);
        }
        o.emails.shuffle(rng);
        o.surface.shuffle(rng);
        o
    }
}

fn pick_values<R: Rng>(rng: &mut R, pool: &[String], n: usize) -> Vec<(String, Satoshi)> {
    (0..n)
        .map(|_| (pool.choose(rng).unwrap().clone(), rng.gen_range(1..1_000_000)))
        .collect()
}

/// A random clustering input exercising every edge relation. Node count
/// stays under 200.
pub fn random_cluster_input<R: Rng>(rng: &mut R) -> OwnedInput {
    let n_sites = rng.gen_range(1..=30);
    let n_addr = rng.gen_range(1..=40);
    let tag: u64 = rng.gen();
    let sites: Vec<OnionDomain> = (0..n_sites)
        .map(|_| onion(rng))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let labels: Vec<SiteLabel> = sites
        .iter()
        .map(|d| SiteLabel {
            domain: d.clone(),
            category: if rng.gen_bool(0.8) {
                *Category::ILLICIT.choose(rng).unwrap()
            } else {
                Category::Other
            },
            phase: LabelPhase::GroundTruth,
            score: 1.0,
            non_english: false,
        })
        .collect();
    let illicit_sites: Vec<&SiteLabel> = labels.iter().filter(|l| l.category.is_illicit()).collect();

    let addrs: Vec<BtcAddress> = (0..n_addr).map(|i| btc(&format!("{tag}-a{i}"))).collect();
    let outsiders: Vec<String> = (0..10).map(|i| addr(&format!("{tag}-x{i}"))).collect();
    let mut illicit = IllicitAddressSet::default();
    if !illicit_sites.is_empty() {
        for a in &addrs {
            for _ in 0..rng.gen_range(1..=2) {
                let s = illicit_sites.choose(rng).unwrap();
                illicit.insert(a.clone(), s.domain.clone(), s.category, rng.gen_bool(0.5));
            }
        }
    }
    let members: Vec<String> = illicit.addresses().map(|a| a.as_str().to_string()).collect();
    let mut pool = members.clone();
    pool.extend(outsiders.iter().cloned());

    let mut txs = Vec::new();
    for n in 0..rng.gen_range(0..=40u64) {
        let n_in = rng.gen_range(1..=5);
        let ins = pick_values(rng, &pool, n_in);
        let outs = if rng.gen_bool(0.25) {
            let v = rng.gen_range(1..100_000);
            let k = rng.gen_range(2..=5);
            let mut o: Vec<(String, Satoshi)> = (0..k).map(|_| (pool.choose(rng).unwrap().clone(), v)).collect();
            if rng.gen_bool(0.5) {
                o.push((pool.choose(rng).unwrap().clone(), rng.gen_range(1..1_000)));
            }
            o
        } else {
            let n_out = rng.gen_range(1..=4);
            pick_values(rng, &pool, n_out)
        };
        txs.push(make_tx(n, &ins, &outs));
    }
    let ledgers = illicit.addresses().map(|a| ledger_of(a, &txs)).collect();

    let email_pool: Vec<String> = (0..5).map(|i| format!("op{i}@mail{}.example", tag % 7)).collect();
    let emails: Vec<SiteEmail> = (0..rng.gen_range(0..=15))
        .map(|_| SiteEmail {
            domain: sites.choose(rng).unwrap().clone(),
            email: email_pool.choose(rng).unwrap().clone(),
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let ips: Vec<IpAddr> = (1..=4).map(|i| IpAddr::V4(Ipv4Addr::new(198, 51, 100, i))).collect();
    let registrants = ["Acme Hosting", "J. Doe", "  acme hosting"];
    let mut surface = Vec::new();
    let mut seen_urls = BTreeSet::new();
    for i in 0..rng.gen_range(0..=20) {
        let url = format!("https://host{}.example/p{i}", rng.gen_range(0..12));
        if !seen_urls.insert(url.clone()) {
            continue;
        }
        let n_addrs = rng.gen_range(0..=3);
        let addresses = (0..n_addrs)
            .map(|_| BtcAddress::parse(pool.choose(rng).unwrap()).unwrap())
            .collect();
        surface.push(SurfaceLink {
            url,
            ip: rng.gen_bool(0.7).then(|| *ips.choose(rng).unwrap()),
            registrant: rng.gen_bool(0.4).then(|| registrants.choose(rng).unwrap().to_string()),
            addresses,
        });
    }
    OwnedInput {
        labels,
        illicit,
        ledgers,
        emails,
        surface,
        txs,
    }
}

/// Mixing rule written out independently: enough distinct input owners
/// and enough equal non-zero outputs.
pub fn oracle_is_mixing(tx: &Transaction, min: usize) -> bool {
    let mut owners: Vec<&str> = tx.inputs.iter().map(|i| i.address.as_str()).collect();
    owners.sort();
    owners.dedup();
    if owners.len() < min {
        return false;
    }
    let mut values: Vec<Satoshi> = tx.outputs.iter().map(|o| o.value).filter(|v| *v > 0).collect();
    values.sort();
    let mut run = 0;
    let mut prev = None;
    for v in values {
        run = if prev == Some(v) { run + 1 } else { 1 };
        prev = Some(v);
        if run >= min {
            return true;
        }
    }
    false
}

fn host(url: &str) -> String {
    url.split("://")
        .nth(1)
        .unwrap_or(url)
        .split('/')
        .next()
        .unwrap()
        .to_ascii_lowercase()
}

/// Brute-force components: collect every admissible edge straight from the
/// raw input and walk them breadth-first.
pub fn oracle_components(input: &OwnedInput, public_threshold: usize, mix: usize) -> BTreeSet<BTreeSet<String>> {
    let members: BTreeSet<String> = input.illicit.addresses().map(|a| a.as_str().to_string()).collect();
    let mut nodes: BTreeSet<String> = BTreeSet::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    for l in &input.labels {
        if l.category.is_illicit() {
            nodes.insert(NodeId::site(&l.domain).as_str().to_string());
        }
    }
    for (a, e) in input.illicit.iter() {
        let an = NodeId::btc(a.as_str()).as_str().to_string();
        nodes.insert(an.clone());
        for s in &e.sites {
            edges.push((NodeId::site(s).as_str().to_string(), an.clone()));
        }
    }
    let mut seen_tx = BTreeSet::new();
    for l in &input.ledgers {
        for tx in &l.transactions {
            if !seen_tx.insert(tx.txid.clone()) || oracle_is_mixing(tx, mix) {
                continue;
            }
            let ins: Vec<&String> = tx
                .inputs
                .iter()
                .map(|i| &i.address)
                .filter(|a| members.contains(*a))
                .collect();
            let outs: Vec<&String> = tx
                .outputs
                .iter()
                .map(|o| &o.address)
                .filter(|a| members.contains(*a))
                .collect();
            for x in &ins {
                for y in &ins {
                    edges.push((format!("btc:{x}"), format!("btc:{y}")));
                }
                for y in &outs {
                    edges.push((format!("btc:{x}"), format!("btc:{y}")));
                }
            }
        }
    }
    for e in &input.emails {
        edges.push((
            NodeId::site(&e.domain).as_str().to_string(),
            format!("email:{}", e.email.to_lowercase()),
        ));
    }
    let reg = |r: &str| format!("registrant:{}", r.trim().to_lowercase());
    let mut hosts: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for s in &input.surface {
        if let Some(ip) = s.ip {
            hosts.entry(format!("ip:{ip}")).or_default().insert(host(&s.url));
        }
        if let Some(r) = s.registrant.as_deref().filter(|r| !r.trim().is_empty()) {
            hosts.entry(reg(r)).or_default().insert(host(&s.url));
        }
    }
    for s in &input.surface {
        let addrs: Vec<&str> = s
            .addresses
            .iter()
            .map(|a| a.as_str())
            .filter(|a| members.contains(*a))
            .collect();
        let mut anchors: Vec<String> = Vec::new();
        if let Some(ip) = s.ip {
            anchors.push(format!("ip:{ip}"));
        }
        if let Some(r) = s.registrant.as_deref().filter(|r| !r.trim().is_empty()) {
            anchors.push(reg(r));
        }
        anchors.retain(|a| hosts[a].len() <= public_threshold);
        if addrs.is_empty() || anchors.is_empty() {
            continue;
        }
        let url = format!("url:{}", s.url);
        for a in anchors {
            edges.push((url.clone(), a));
        }
        for a in addrs {
            edges.push((url.clone(), format!("btc:{a}")));
        }
    }
    let mut adj: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (a, b) in edges {
        nodes.insert(a.clone());
        nodes.insert(b.clone());
        adj.entry(a.clone()).or_default().push(b.clone());
        adj.entry(b).or_default().push(a);
    }
    let mut done: BTreeSet<String> = BTreeSet::new();
    let mut out = BTreeSet::new();
    for n in &nodes {
        if done.contains(n) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut q = VecDeque::from([n.clone()]);
        done.insert(n.clone());
        while let Some(x) = q.pop_front() {
            for y in adj.get(&x).into_iter().flatten() {
                if done.insert(y.clone()) {
                    q.push_back(y.clone());
                }
            }
            comp.insert(x);
        }
        out.insert(comp);
    }
    out
}

/// Per-output enumeration of income: every output paid to a member in a
/// transaction of that member's ledger, unless some input and some output
/// of that transaction are both members.
pub fn oracle_income(members: &BTreeSet<String>, ledgers: &[AddressLedger]) -> (Satoshi, Satoshi, bool) {
    let (mut total, mut gross, mut any_internal) = (0, 0, false);
    for l in ledgers {
        let me = l.address.as_str();
        if !members.contains(me) {
            continue;
        }
        for tx in &l.transactions {
            let mut internal = false;
            for i in &tx.inputs {
                for o in &tx.outputs {
                    if members.contains(&i.address) && members.contains(&o.address) {
                        internal = true;
                    }
                }
            }
            any_internal |= internal;
            for o in &tx.outputs {
                if o.address == me {
                    gross += o.value;
                    if !internal {
                        total += o.value;
                    }
                }
            }
        }
    }
    (total, gross, any_internal)
}

/// Random ledgers over a pool of members and outsiders; every ledger
/// holds exactly the transactions touching its address.
pub fn random_ledgers<R: Rng>(rng: &mut R) -> (IllicitAddressSet, Vec<AddressLedger>) {
    let tag: u64 = rng.gen();
    let n_members = rng.gen_range(1..=8);
    let members: Vec<BtcAddress> = (0..n_members).map(|i| btc(&format!("{tag}-m{i}"))).collect();
    let site = onion(rng);
    let mut illicit = IllicitAddressSet::default();
    for m in &members {
        if rng.gen_bool(0.7) {
            illicit.insert(m.clone(), site.clone(), *Category::ILLICIT.choose(rng).unwrap(), false);
        }
    }
    let mut pool: Vec<String> = members.iter().map(|m| m.as_str().to_string()).collect();
    pool.extend((0..5).map(|i| addr(&format!("{tag}-o{i}"))));
    let mut txs = Vec::new();
    for n in 0..rng.gen_range(0..=30u64) {
        let n_in = rng.gen_range(1..=3);
        let ins = pick_values(rng, &pool, n_in);
        let n_out = rng.gen_range(1..=3);
        let outs = pick_values(rng, &pool, n_out);
        txs.push(make_tx(n, &ins, &outs));
    }
    let ledgers = members.iter().map(|m| ledger_of(m, &txs)).collect();
    (illicit, ledgers)
}

/// Node-id components of a finished partition.
pub fn partition_components(c: &mut onionforge_core::cluster::Clustering) -> BTreeSet<BTreeSet<String>> {
    let g = &c.graph;
    c.partition
        .components()
        .into_iter()
        .map(|comp| comp.into_iter().map(|i| g.node(i).as_str().to_string()).collect())
        .collect()
}

pub fn kind_count(comp: &BTreeSet<String>, kind: NodeKind) -> usize {
    comp.iter()
        .filter(|n| n.starts_with(&format!("{}:", kind.prefix())))
        .count()
}

pub const KEYWORDS: [(Category, &str); 12] = [
    (Category::InvestmentScams, "flaw multiply bitcoins client transaction innovative digital investment found history"),
    (Category::PrivateKey, "balance electrum privkey lordpay wallet private wallets key accounts price"),
    (Category::CloneCard, "buyed says transfer product cards money western card paypal union"),
    (Category::CounterfeitBills, "bills euro value price usd bill dollar amounts costs ship"),
    (Category::Citizenship, "dateofbirth addresscity ahmet erdogan motherfirst addressdistrict addressneighborhood birthcity doororentrancenumber fatherfirst"),
    (Category::Drugs, "name courses middle effects extreme zip contacts city country drug"),
    (Category::Hacker, "hack tutorials programs confirmation begin archive automatically message zip send"),
    (Category::Hitmen, "target hitmen provide information identifying identify murder profile address job"),
    (Category::SexualAbuse, "porno porn video sex free teen film gay online russian"),
    (Category::Memberships, "access pin payment redirect page deposit authorization creation reversed red"),
    (Category::Weapons, "darkseid armour calibers drkseid modify succesfully arms guns years expertise"),
    (Category::Shop, "onion index hidden marketplace cards tor card credit hosting service"),
];

pub const FILLER: &str = "garden river window yellow table morning silver paper forest candle harbor pencil \
    meadow ladder cotton violin marble pillow lantern carpet orchard saddle kettle blanket \
    velvet compass thunder feather glacier meadowlark pebble willow canyon ribbon walnut \
    sparrow harvest chimney cabbage lemon tulip barrel anchor cobble mitten saucer tunnel \
    pepper hammock biscuit quartz puzzle rocket shovel teapot trumpet umbrella";

fn page_of(domain: &OnionDomain, words: &[&str]) -> PageRecord {
    PageRecord {
        domain: domain.clone(),
        path: "/".into(),
        html: format!("<html><body><p>{}</p></body></html>", words.join(" ")).into_bytes(),
        fetched_at: Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap(),
    }
}

/// One ground-truth template page per category built from its keywords,
/// `noisy` perturbed copies and one exact duplicate per category, plus
/// `others` filler-only pages. Returns the corpus, the ground truth and the
/// expected label of every non-reference site with its kind.
pub fn template_corpus<R: Rng>(
    rng: &mut R,
    noisy: usize,
    others: usize,
) -> (
    Corpus,
    Vec<GroundTruthRow>,
    BTreeMap<OnionDomain, (Category, &'static str)>,
) {
    let filler: Vec<&str> = FILLER.split_whitespace().collect();
    let mut domains = BTreeSet::new();
    let mut fresh = |rng: &mut R| loop {
        let d = onion(rng);
        if domains.insert(d.clone()) {
            return d;
        }
    };

    let mut pages = Vec::new();
    let mut gt_rows = Vec::new();
    let mut truth: BTreeMap<OnionDomain, (Category, &str)> = BTreeMap::new();
    for (cat, kw) in KEYWORDS {
        let mut template: Vec<&str> = kw.split_whitespace().flat_map(|w| [w, w, w]).collect();
        template.extend((0..12).map(|_| *filler.choose(&mut *rng).unwrap()));
        let d = fresh(&mut *rng);
        pages.push(page_of(&d, &template));
        gt_rows.push(GroundTruthRow {
            domain: d,
            path: "/".into(),
            category: cat,
        });
        for _ in 0..noisy {
            let mut noisy: Vec<&str> = template.iter().copied().filter(|_| rng.gen_bool(0.75)).collect();
            noisy.extend((0..10).map(|_| *filler.choose(&mut *rng).unwrap()));
            noisy.shuffle(&mut *rng);
            let d = fresh(&mut *rng);
            pages.push(page_of(&d, &noisy));
            truth.insert(d, (cat, "noisy"));
        }
        let d = fresh(&mut *rng);
        pages.push(page_of(&d, &template));
        truth.insert(d, (cat, "duplicate"));
    }
    for _ in 0..others {
        let words: Vec<&str> = (0..30).map(|_| *filler.choose(&mut *rng).unwrap()).collect();
        let d = fresh(&mut *rng);
        pages.push(page_of(&d, &words));
        truth.insert(d, (Category::Other, "other"));
    }

    let (corpus, _) = Corpus::from_pages(pages);
    (corpus, gt_rows, truth)
}

pub fn site_label(domain: &OnionDomain, category: Category) -> SiteLabel {
    SiteLabel {
        domain: domain.clone(),
        category,
        phase: LabelPhase::GroundTruth,
        score: 1.0,
        non_english: false,
    }
}
