//! Build evaluable oracles from declarative specifications.

use num_traits::Signed;

use pmcone_core::recover::{FnOracle, InducedOracle, MetricOracle, PointMap, Uniqueness};
use pmcone_core::FiniteSpace;

use crate::doc::OracleSpec;
use crate::CliError;

pub type BoxedOracle = Box<dyn MetricOracle + Send + Sync>;

/// Resolve a label map from codomain labels to domain labels into a point
/// bijection.
fn resolve_bijection(
    map: &std::collections::BTreeMap<String, String>,
    domain: &FiniteSpace,
    codomain: &FiniteSpace,
) -> Result<PointMap, CliError> {
    if domain.point_count() != codomain.point_count() {
        return Err(CliError::domain(format!(
            "induced oracle needs equal cardinalities, got {} and {}",
            domain.point_count(),
            codomain.point_count()
        )));
    }
    if map.len() != codomain.point_count() {
        return Err(CliError::domain(format!(
            "bijection map has {} entries, codomain has {} points",
            map.len(),
            codomain.point_count()
        )));
    }
    let mut phi = vec![usize::MAX; codomain.point_count()];
    for (from, to) in map {
        let y = codomain
            .index_of(from)
            .ok_or_else(|| CliError::domain(format!("unknown codomain label {from:?}")))?;
        let x = domain
            .index_of(to)
            .ok_or_else(|| CliError::domain(format!("unknown domain label {to:?}")))?;
        phi[y] = x;
    }
    PointMap::bijection(phi, Uniqueness::Unique)
        .map_err(|e| CliError::domain(format!("bijection map invalid: {e}")))
}

/// Build the oracle for a specification between the given spaces.
pub fn build_oracle(
    spec: &OracleSpec,
    domain: &FiniteSpace,
    codomain: &FiniteSpace,
) -> Result<BoxedOracle, CliError> {
    match spec {
        OracleSpec::Induced { map } => {
            let phi = resolve_bijection(map, domain, codomain)?;
            let oracle = InducedOracle::new(domain.clone(), codomain.clone(), phi)
                .map_err(|e| CliError::domain(e.to_string()))?;
            Ok(Box::new(oracle))
        }
        OracleSpec::Translation { offset } => {
            if domain.point_count() != codomain.point_count() {
                return Err(CliError::domain(
                    "translation oracle needs equal cardinalities".to_string(),
                ));
            }
            let offset = offset.to_metric()?;
            if offset.point_count() != codomain.point_count() {
                return Err(CliError::domain(format!(
                    "offset on {} points, codomain has {}",
                    offset.point_count(),
                    codomain.point_count()
                )));
            }
            Ok(Box::new(FnOracle::new(domain.clone(), codomain.clone(), move |d| {
                d.add(&offset).expect("sizes checked at build time")
            })))
        }
        OracleSpec::Scaling { factor } => {
            let factor = factor.0.clone();
            if factor.is_negative() {
                return Err(CliError::domain("scaling factor must be nonnegative".to_string()));
            }
            if domain.point_count() != codomain.point_count() {
                return Err(CliError::domain(
                    "scaling oracle needs equal cardinalities".to_string(),
                ));
            }
            Ok(Box::new(FnOracle::new(domain.clone(), codomain.clone(), move |d| {
                d.scale(&factor).expect("factor checked at build time")
            })))
        }
        OracleSpec::MatrixPermutation { permutation } => {
            if codomain.point_count() != domain.point_count() {
                return Err(CliError::domain(
                    "matrix permutation needs equal cardinalities".to_string(),
                ));
            }
            if permutation.len() != domain.point_count() {
                return Err(CliError::domain(format!(
                    "permutation has {} labels, domain has {} points",
                    permutation.len(),
                    domain.point_count()
                )));
            }
            let mut perm = Vec::with_capacity(permutation.len());
            for label in permutation {
                perm.push(domain.index_of(label).ok_or_else(|| {
                    CliError::domain(format!("unknown domain label {label:?}"))
                })?);
            }
            let phi = PointMap::bijection(perm, Uniqueness::Unique)
                .map_err(|e| CliError::domain(format!("permutation invalid: {e}")))?;
            let oracle = InducedOracle::new(domain.clone(), codomain.clone(), phi)
                .map_err(|e| CliError::domain(e.to_string()))?;
            Ok(Box::new(oracle))
        }
        OracleSpec::Composite { stages } => {
            if stages.is_empty() {
                return Err(CliError::domain("composite oracle needs stages".to_string()));
            }
            let mut built = Vec::with_capacity(stages.len());
            for (i, stage) in stages.iter().enumerate() {
                // Intermediate stages act on the domain space; the last
                // one lands in the codomain.
                let target = if i + 1 == stages.len() { codomain } else { domain };
                built.push(build_oracle(stage, domain, target)?);
            }
            Ok(Box::new(FnOracle::new(domain.clone(), codomain.clone(), move |d| {
                let mut value = d.clone();
                for stage in &built {
                    value = stage.eval(&value);
                }
                value
            })))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doc::{MetricDocument, Rat, SpaceDocument};
    use pmcone_core::metric::Pseudometric;
    use pmcone_core::scalar::int;

    fn space(json: &str) -> FiniteSpace {
        serde_json::from_str::<SpaceDocument>(json).unwrap().to_space().unwrap()
    }

    fn three_space() -> FiniteSpace {
        space(r#"{"points":["a","b","c"],"ambient":[[0,1,2],[1,0,1],[2,1,0]]}"#)
    }

    #[test]
    fn induced_spec_builds_and_permutes() {
        let x = three_space();
        let y = space(r#"{"points":["u","v","w"],"ambient":[[0,1,1],[1,0,1],[1,1,0]]}"#);
        let spec: OracleSpec = serde_json::from_str(
            r#"{"kind":"induced","map":{"u":"b","v":"c","w":"a"}}"#,
        )
        .unwrap();
        let oracle = build_oracle(&spec, &x, &y).unwrap();
        let d = x.ambient().clone();
        let image = oracle.eval(&d);
        assert_eq!(*image.get(0, 1), *d.get(1, 2));
        assert_eq!(*image.get(0, 2), *d.get(1, 0));
        assert!(oracle.inverse_eval(&image).is_some());
    }

    #[test]
    fn translation_and_scaling_specs() {
        let x = three_space();
        let offset = MetricDocument::from_metric(x.ambient(), None);
        let spec = OracleSpec::Translation { offset };
        let oracle = build_oracle(&spec, &x, &x).unwrap();
        assert_eq!(oracle.eval(&Pseudometric::zero(3)), *x.ambient());

        let spec = OracleSpec::Scaling { factor: Rat(int(2)) };
        let oracle = build_oracle(&spec, &x, &x).unwrap();
        assert_eq!(oracle.eval(x.ambient()).norm(), int(2) * x.ambient().norm());

        let spec = OracleSpec::Scaling { factor: Rat(int(-1)) };
        assert!(build_oracle(&spec, &x, &x).is_err());
    }

    #[test]
    fn composite_spec_chains_stages() {
        let x = three_space();
        let spec: OracleSpec = serde_json::from_str(
            r#"{"kind":"composite","stages":[
                {"kind":"scaling","factor":"2"},
                {"kind":"matrix_permutation","permutation":["b","c","a"]}
            ]}"#,
        )
        .unwrap();
        let oracle = build_oracle(&spec, &x, &x).unwrap();
        let image = oracle.eval(x.ambient());
        assert_eq!(*image.get(0, 1), int(2) * x.ambient().get(1, 2));
    }

    #[test]
    fn induced_spec_rejects_non_bijections() {
        let x = three_space();
        let spec: OracleSpec = serde_json::from_str(
            r#"{"kind":"induced","map":{"a":"a","b":"a","c":"c"}}"#,
        )
        .unwrap();
        assert!(build_oracle(&spec, &x, &x.clone()).is_err());
    }
}
