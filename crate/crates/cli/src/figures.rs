//! Data behind the Hamiltonian surface plots and the effective-potential curves.
//!
//! Files written to the `--out` directory:
//! `surface_class_i.csv` (x, ptilde, H_plus, H_minus at k = ω = 0.1),
//! `surface_class_ii.csv` (x, ptilde, H at k = ω = 0.1),
//! `potential_class_ii.csv/.svg` (ζ against V for ε = 1, ¼, 0 at k = ω = 1),
//! `potential_class_i_eps_{1,0.25,0}.csv/.svg` (ξ against V⁺ and V⁻ at k = ω = 1) and
//! `summary.json` with the checks listed there.

use std::path::Path;

use clap::Args;
use lienard_core::format::csv_string;
use lienard_core::hamiltonian::HamiltonianModel;
use lienard_core::model::IsochronousParams;
use lienard_core::quantum::{effective_potential, EffectivePotential, OrderingScheme};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::svg::{Plot, Series};
use crate::{validation, CliError, CliResult, Sink};

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FiguresArgs {
    /// Grid points per axis of the surfaces [default: 41].
    #[arg(long)]
    pub surface_points: Option<usize>,
    /// Points per potential curve [default: 400].
    #[arg(long)]
    pub curve_points: Option<usize>,
}

/// ε = 1, ¼, 0 via the zhu-kroemer, mustafa and ben-daniel-duke orderings.
const EPSILON_PRESETS: [(&str, &str); 3] = [("1", "zhu-kroemer"), ("0.25", "mustafa"), ("0", "ben-daniel-duke")];

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Class I value including the boundary `p̃ = 0`, where both branches tend to 0:
/// `h p̃/(ℓ+1) → 0` and, with `ℓ = −⅓`, `(ℓ/(2ℓ+1)) b^{(2ℓ+1)/ℓ} = −σ p̃^{1/2} → 0`.
fn class_i_value(model: &HamiltonianModel, x: f64, p: f64) -> CliResult<f64> {
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(model.hamiltonian_value(x, p)?)
}

/// Minimum of a unimodal function on `[a, b]` by golden-section search.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn write(dir: &Path, name: &str, content: &str) -> CliResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, content).or_else(|e| validation(format!("cannot write {}: {e}", path.display())))
}

pub fn run(a: FiguresArgs, sink: &Sink) -> CliResult<()> {
    let Some(dir) = sink.out.as_deref() else {
        return validation("figures needs --out DIR");
    };
    if sink.format.is_some() {
        return validation("figures always writes CSV grids and SVG plots; drop --format");
    }
    std::fs::create_dir_all(dir).or_else(|e| validation(format!("cannot create {}: {e}", dir.display())))?;
    let ns = a.surface_points.unwrap_or(41);
    let nc = a.curve_points.unwrap_or(400);
    if ns < 2 || nc < 2 {
        return validation("grids need at least 2 points");
    }

    // Surfaces.
    let small = IsochronousParams::new(0.1, 0.1)?;
    let (hp, hm, h2) = (
        HamiltonianModel::class_i(small, true)?,
        HamiltonianModel::class_i(small, false)?,
        HamiltonianModel::class_ii(small)?,
    );
    let xs = linspace(-2.0, 2.0, ns);
    let mut rows_i = Vec::with_capacity(ns * ns);
    let mut boundary_gap = 0.0f64;
    for &x in &xs {
        for p in linspace(0.0, 2.0, ns) {
            let (a, b) = (class_i_value(&hp, x, p)?, class_i_value(&hm, x, p)?);
            if p == 0.0 {
                boundary_gap = boundary_gap.max((a - b).abs());
            }
            rows_i.push(vec![x, p, a, b]);
        }
    }
    write(dir, "surface_class_i.csv", &csv_string(&["x", "ptilde", "H_plus", "H_minus"], &rows_i))?;
    let mut rows_ii = Vec::with_capacity(ns * ns);
    for &x in &xs {
        for p in linspace(0.05, 2.0, ns) {
            rows_ii.push(vec![x, p, h2.hamiltonian_value(x, p)?]);
        }
    }
    write(dir, "surface_class_ii.csv", &csv_string(&["x", "ptilde", "H"], &rows_ii))?;

    // Effective potentials at k = ω = 1.
    let unit = IsochronousParams::new(1.0, 1.0)?;
    let schemes: Vec<(&str, OrderingScheme)> = EPSILON_PRESETS
        .iter()
        .map(|&(label, name)| Ok((label, OrderingScheme::preset(name)?)))
        .collect::<Result<_, lienard_core::Error>>()?;

    let ii_model = HamiltonianModel::class_ii(unit)?;
    let ii_pots: Vec<EffectivePotential> = schemes
        .iter()
        .map(|(_, s)| effective_potential(&ii_model, s))
        .collect::<Result<_, _>>()?;
    let zetas = linspace(1.0, 8.0, nc);
    let rows: Vec<Vec<f64>> = zetas
        .iter()
        .map(|&z| std::iter::once(z).chain(ii_pots.iter().map(|p| p.eval(z))).collect())
        .collect();
    write(dir, "potential_class_ii.csv", &csv_string(&["zeta", "V_eps_1", "V_eps_0.25", "V_eps_0"], &rows))?;
    let colours = ["#6a3d9a", "#1b9e77", "#d95f02"];
    let plot = Plot {
        title: "class II effective potential, k = omega = 1",
        x_label: "zeta",
        y_label: "V_eff",
        y_range: None,
        series: schemes
            .iter()
            .zip(&ii_pots)
            .zip(colours)
            .map(|(((label, _), pot), colour)| Series {
                label: format!("eps = {label}"),
                colour,
                points: zetas.iter().map(|&z| (z, pot.eval(z))).collect(),
            })
            .collect(),
    };
    write(dir, "potential_class_ii.svg", &plot.render())?;

    let eps1 = &ii_pots[0];
    let zeta_star = golden_section(|z| eps1.eval(z), 1.0, 8.0, 1e-12);
    let zeta_exact = (eps1.invsq / eps1.quad).powf(0.25);

    let plus_model = HamiltonianModel::class_i(unit, true)?;
    let minus_model = HamiltonianModel::class_i(unit, false)?;
    let xis = linspace(0.05, 25.0, nc);
    let mut reflection_gap = 0.0f64;
    for (label, scheme) in &schemes {
        let vp = effective_potential(&plus_model, scheme)?;
        let vm = effective_potential(&minus_model, scheme)?;
        let mirrored = EffectivePotential { lin: -vp.lin, ..vp };
        let rows: Vec<Vec<f64>> = xis.iter().map(|&x| vec![x, vp.eval(x), vm.eval(x)]).collect();
        for &x in &xis {
            reflection_gap = reflection_gap.max((mirrored.eval(x) - vm.eval(x)).abs());
        }
        write(
            dir,
            &format!("potential_class_i_eps_{label}.csv"),
            &csv_string(&["xi", "V_plus", "V_minus"], &rows),
        )?;
        let title = format!("class I effective potentials, eps = {label}, k = omega = 1");
        let plot = Plot {
            title: &title,
            x_label: "xi",
            y_label: "V_eff",
            y_range: Some((-1.0, 6.0)),
            series: vec![
                Series {
                    label: "V+".into(),
                    colour: colours[0],
                    points: xis.iter().map(|&x| (x, vp.eval(x))).collect(),
                },
                Series {
                    label: "V-".into(),
                    colour: colours[1],
                    points: xis.iter().map(|&x| (x, vm.eval(x))).collect(),
                },
            ],
        };
        write(dir, &format!("potential_class_i_eps_{label}.svg"), &plot.render())?;
    }

    let summary = json!({
        "class_ii_eps_1": {
            "zeta_star_numeric": zeta_star,
            "zeta_star_exact": zeta_exact,
            "abs_diff": (zeta_star - zeta_exact).abs(),
        },
        "class_i_boundary_max_gap": boundary_gap,
        "class_i_reflection_max_gap": reflection_gap,
    });
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    write(dir, "summary.json", &text)
}
