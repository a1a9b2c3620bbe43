//! Functional terms.
//!
//! ```text
//! identity | bit-flip | search-first | diverge | r-encode | rtilde-encode
//! block-search | block-vote | column-search
//! projection(a,b) | xor(a,b,...) | and(a,b,...) | or(a,b,...)
//! constant(b) | halt-if-one(p) | counting(c,SET) | one-inverse(a,b)
//! patch(F,n=b,...) | flip(F,SET) | race(F,G)
//! mf-embed(F) | mf-to-ubfb(F) | ubfb-to-cf(F)
//! ```
//!
//! `SET` is `ep:T/P`, `evens`, `odds`, `all` or `none`. Bare names not in the
//! table are looked up in the caller's environment.

use std::collections::{BTreeMap, HashMap};

use super::catalog::{
    Combine, Constant, Counting, Diverge, HaltIfOne, Lookup, OneInverse, REncode, RtildeEncode, SearchFirst,
};
use super::combinators::{FlipOnSet, Patch, Race};
use super::Functional;
use crate::codings::{BlockSearch, BlockVote, ColumnSearch, MfEmbed};
use crate::error::{Error, Result};
use crate::oracles::Affine;
use crate::sequences::EventuallyPeriodicSet;
use crate::term::{expect_arity, parse_bit, parse_u64, Term};
use crate::transformers::{MfToUbfb, UbfbToCf};

pub fn parse_functional(text: &str) -> Result<Functional> {
    parse_functional_with(text, &HashMap::new())
}

pub fn parse_functional_with(text: &str, env: &HashMap<String, Functional>) -> Result<Functional> {
    functional_from_term(&Term::parse(text)?, env)
}

pub(crate) fn parse_set(t: &Term) -> Result<EventuallyPeriodicSet> {
    match t.as_atom() {
        Some("evens") => Ok(EventuallyPeriodicSet::evens()),
        Some("odds") => Ok(EventuallyPeriodicSet::evens().complement()),
        Some("all") => Ok(EventuallyPeriodicSet::all()),
        Some("none") => Ok(EventuallyPeriodicSet::empty()),
        Some(a) => EventuallyPeriodicSet::from_text(a),
        None => Err(Error::Parse { input: t.to_string(), message: "expected a set".into() }),
    }
}

fn affine_pairs(t: &Term) -> Result<Vec<Affine>> {
    let args = t.args();
    if args.is_empty() || !args.len().is_multiple_of(2) {
        return Err(Error::Parse {
            input: t.to_string(),
            message: format!("`{}` takes a nonempty list of scale,offset pairs", t.head()),
        });
    }
    args.chunks(2).map(|c| Ok(Affine::new(parse_u64(&c[0])?, parse_u64(&c[1])?))).collect()
}

fn patch_entry(t: &Term) -> Result<(u64, bool)> {
    let bad = || Error::Parse { input: t.to_string(), message: "expected `n=b`".into() };
    let (n, b) = t.as_atom().and_then(|a| a.split_once('=')).ok_or_else(bad)?;
    let n = n.parse().map_err(|_| bad())?;
    let b = parse_bit(&Term::atom(b)).map_err(|_| bad())?;
    Ok((n, b))
}

pub fn functional_from_term(t: &Term, env: &HashMap<String, Functional>) -> Result<Functional> {
    let sub = |i: usize| functional_from_term(&t.args()[i], env);
    let f = match (t, t.head()) {
        (Term::Atom(_), "identity") => Functional::new(Lookup::identity()),
        (Term::Atom(_), "bit-flip") => Functional::new(Lookup::flip()),
        (Term::Atom(_), "search-first") => Functional::new(SearchFirst),
        (Term::Atom(_), "diverge") => Functional::new(Diverge),
        (Term::Atom(_), "r-encode") => Functional::new(REncode),
        (Term::Atom(_), "rtilde-encode") => Functional::new(RtildeEncode),
        (Term::Atom(_), "block-search") => Functional::new(BlockSearch),
        (Term::Atom(_), "block-vote") => Functional::new(BlockVote),
        (Term::Atom(_), "column-search") => Functional::new(ColumnSearch),
        (Term::Atom(a), _) => {
            return env.get(a.as_str()).cloned().ok_or_else(|| Error::UnknownId(a.clone()));
        }
        (_, "projection") => {
            expect_arity(t, 2)?;
            let m = affine_pairs(t)?;
            Functional::new(Lookup { op: Combine::Project, maps: m })
        }
        (_, "xor") => Functional::new(Lookup { op: Combine::Xor, maps: affine_pairs(t)? }),
        (_, "and") => Functional::new(Lookup { op: Combine::And, maps: affine_pairs(t)? }),
        (_, "or") => Functional::new(Lookup { op: Combine::Or, maps: affine_pairs(t)? }),
        (_, "constant") => {
            expect_arity(t, 1)?;
            Functional::new(Constant(parse_bit(&t.args()[0])?))
        }
        (_, "halt-if-one") => {
            expect_arity(t, 1)?;
            Functional::new(HaltIfOne(parse_u64(&t.args()[0])?))
        }
        (_, "counting") => {
            expect_arity(t, 2)?;
            Functional::new(Counting { count: parse_u64(&t.args()[0])?, relevant: parse_set(&t.args()[1])? })
        }
        (_, "one-inverse") => {
            expect_arity(t, 2)?;
            let a = Affine::new(parse_u64(&t.args()[0])?, parse_u64(&t.args()[1])?);
            if !a.is_injective() {
                return Err(Error::InvalidArgument("one-inverse needs a nonzero scale".into()));
            }
            Functional::new(OneInverse(a))
        }
        (_, "patch") => {
            if t.args().is_empty() {
                return Err(Error::Parse { input: t.to_string(), message: "`patch` needs a functional".into() });
            }
            let mut patch = BTreeMap::new();
            for e in &t.args()[1..] {
                let (n, b) = patch_entry(e)?;
                patch.insert(n, b);
            }
            Functional::new(Patch { inner: sub(0)?, patch })
        }
        (_, "flip") => {
            expect_arity(t, 2)?;
            Functional::new(FlipOnSet { inner: sub(0)?, set: parse_set(&t.args()[1])? })
        }
        (_, "race") => {
            expect_arity(t, 2)?;
            Functional::new(Race { even: sub(0)?, odd: sub(1)? })
        }
        (_, "mf-embed") => {
            expect_arity(t, 1)?;
            Functional::new(MfEmbed { inner: sub(0)? })
        }
        (_, "mf-to-ubfb") => {
            expect_arity(t, 1)?;
            Functional::new(MfToUbfb { inner: sub(0)? })
        }
        (_, "ubfb-to-cf") => {
            expect_arity(t, 1)?;
            Functional::new(UbfbToCf { inner: sub(0)? })
        }
        (_, h) => return Err(Error::UnknownId(h.to_string())),
    };
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_round_trip() {
        for s in [
            "identity",
            "bit-flip",
            "projection(2,1)",
            "xor(1,0,2,3)",
            "counting(3,ep:/10)",
            "patch(identity,0=1,5=0)",
            "flip(bit-flip,ep:1/01)",
            "race(identity,search-first)",
            "mf-to-ubfb(projection(0,0))",
            "ubfb-to-cf(mf-embed(r-encode))",
            "one-inverse(2,0)",
        ] {
            assert_eq!(parse_functional(s).unwrap().id(), s);
        }
        assert_eq!(parse_functional("flip(identity,evens)").unwrap().id(), "flip(identity,ep:/10)");
    }

    #[test]
    fn unknown_ids_rejected() {
        assert!(matches!(parse_functional("nope"), Err(Error::UnknownId(_))));
        assert!(matches!(parse_functional("nope(1)"), Err(Error::UnknownId(_))));
        assert!(parse_functional("projection(1)").is_err());
        assert!(parse_functional("patch(identity,5)").is_err());
    }

    #[test]
    fn environment_lookup() {
        let env = HashMap::from([("phi".to_string(), parse_functional("bit-flip").unwrap())]);
        assert_eq!(parse_functional_with("race(phi,identity)", &env).unwrap().id(), "race(bit-flip,identity)");
    }
}
