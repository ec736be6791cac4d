//! CSV iteration traces.

use std::io::Write;

use subproj_core::SolveTrace;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header, one row per iteration, then a `#` summary row.
pub fn write_trace(trace: &SolveTrace, with_witness: bool, mut w: impl Write) -> std::io::Result<()> {
    let mut header = String::from("n,index,lambda,residual,step_norm");
    if with_witness {
        header.push_str(",dist_to_witness");
    }
    writeln!(w, "{header}")?;
    for r in &trace.records {
        write!(w, "{},{},{},{},{}", r.n, r.index, num(r.lambda), num(r.residual), num(r.step_norm))?;
        if with_witness {
            write!(w, ",{}", r.dist_to_witness.map_or_else(String::new, num))?;
        }
        writeln!(w)?;
    }
    writeln!(
        w,
        "# status={:?} iterations={} final_residual={} assumptions={}",
        trace.status,
        trace.records.len(),
        num(trace.final_residual),
        trace.assumptions.join("; ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use subproj_core::feasibility::solve;
    use subproj_core::{FunctionSpec, Problem, SetSpec, Vector};

    #[test]
    fn rows_match_iterations() {
        let c = |x: f64| SetSpec::ball(Vector::from_slice(&[x, 0.0]).unwrap(), 1.0).unwrap();
        let p = Problem::new(
            vec![FunctionSpec::dist(c(0.0)).unwrap(), FunctionSpec::dist(c(1.5)).unwrap()],
            Vector::from_slice(&[5.0, 5.0]).unwrap(),
        )
        .with_witness(Vector::from_slice(&[0.75, 0.0]).unwrap());
        let (_, trace) = solve(&p).unwrap();
        let mut out = Vec::new();
        write_trace(&trace, true, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), trace.records.len() + 2);
        assert_eq!(lines[0], "n,index,lambda,residual,step_norm,dist_to_witness");
        assert!(lines.last().unwrap().starts_with("# status=Converged"));
        assert_eq!(lines[1].split(',').count(), 6);
    }
}
