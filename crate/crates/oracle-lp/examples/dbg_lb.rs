use oracle_lp::covering::{solve_worstcase, SolverConfig};
use oracle_lp::lowerbound::{build_adversarial_family, AdversaryOracle};
use oracle_lp::oracle::{OracleReply, QueryOracle, Transcript};
use oracle_lp::rat::Rat;
use oracle_lp::vecn::rat_to_f64;

struct Loud(AdversaryOracle);

impl QueryOracle for Loud {
    fn m(&self) -> usize {
        self.0.m()
    }
    fn n(&self) -> usize {
        self.0.n()
    }
    fn l(&self) -> u64 {
        self.0.l()
    }
    fn query(&mut self, x: &[Rat]) -> OracleReply {
        let r = self.0.query(x);
        let q = self.0.queries();
        if q % 10 == 0 || q < 20 {
            let xs: Vec<f64> = x.iter().map(rat_to_f64).collect();
            let bits: u64 = x.iter().map(oracle_lp::rat::bit_size).sum();
            eprintln!(
                "q{q} t={:?} bits={bits}: {xs:?} -> {r:?} committed={:?}",
                std::time::Instant::now(),
                self.0.committed()
            );
        }
        r
    }
    fn queries(&self) -> usize {
        self.0.queries()
    }
    fn transcript(&self) -> &Transcript {
        self.0.transcript()
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(2);
    let m: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(4);
    let cap: i64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(20);
    let fam = build_adversarial_family(n, m).unwrap();
    eprintln!("k={} delta={} L={}", fam.k, fam.delta, AdversaryOracle::new(fam.clone()).l());
    let oracle = Loud(AdversaryOracle::new(fam));
    let cfg = SolverConfig::with_cap(cap);
    let (out, stats, _hom) = solve_worstcase(oracle, &cfg).unwrap();
    eprintln!("out={out:?} stats={stats:?}");
}
