use clap::{Args, ValueEnum};
use lienard_core::dynamics::{
    integrate, integrate_sampled, isochronicity_scan, isochronicity_scan_params, resolve_denominator as resolve,
    Trajectory,
};
use lienard_core::format::{csv_records, csv_string, fmt_f64};
use lienard_core::hamiltonian::{chiellini_roots, hamilton_flow, ClassTag, HamiltonianModel, ModelDescriptor};
use lienard_core::model::{
    expand_generalized, expand_isochronous, GeneralizedParams, IsochronousParams, LienardSystem, Poly,
    StateClassical,
};
use lienard_core::quantum::{
    boundstate_scan_i, closed_form_spectrum_ii, effective_potential, eigenfunction_ii, numeric_eigensolve,
    GridSpec, OrderingScheme, SpectrumResult, WaveGrid,
};
use lienard_core::transforms::{build_certificate, SpecialCaseLS};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::req;
use crate::svg::{Plot, Series};
use crate::{validation, CliResult, Format, Sink};

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `f = kx`, `g = ω²x + (k²/9)x³`.
    Iso,
    /// `f = a1 x`, `g = a2 x + ((r−1)/r²)(a1²/2)x³`.
    Gen,
    /// Explicit `--f` and `--g` coefficient lists.
    Poly,
}

/// Selects a Liénard system.
#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SystemArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// `power:coeff` pairs, e.g. `0:-1,2:1` for `x² − 1`.
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
}

fn parse_poly(text: &str, flag: &str) -> CliResult<Poly> {
    let mut terms = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parsed = item
            .split_once(':')
            .and_then(|(p, c)| Some((p.trim().parse::<u32>().ok()?, c.trim().parse::<f64>().ok()?)));
        match parsed {
            Some(t) => terms.push(t),
            None => return validation(format!("--{flag}: expected power:coeff, got '{item}'")),
        }
    }
    Ok(Poly::new(terms)?)
}

impl SystemArgs {
    fn iso(&self) -> CliResult<IsochronousParams> {
        Ok(IsochronousParams::new(req(self.k, "k")?, req(self.omega, "omega")?)?)
    }

    fn generalized(&self) -> CliResult<GeneralizedParams> {
        Ok(GeneralizedParams::new(
            req(self.a1, "a1")?,
            req(self.a2, "a2")?,
            req(self.r, "r")?,
        )?)
    }

    fn system(&self) -> CliResult<LienardSystem> {
        match self.family.unwrap_or(Family::Iso) {
            Family::Iso => Ok(expand_isochronous(self.iso()?)?),
            Family::Gen => Ok(expand_generalized(self.generalized()?)?),
            Family::Poly => {
                let (Some(f), Some(g)) = (&self.f, &self.g) else {
                    return validation("--family poly needs both --f and --g");
                };
                Ok(LienardSystem::new(parse_poly(f, "f")?, parse_poly(g, "g")?))
            }
        }
    }
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub v0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Integrator tolerance [default: 1e-10].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Uniform output samples through the dense output; one row per step when omitted.
    #[arg(long)]
    pub samples: Option<usize>,
}

fn trajectory_plot(title: &str, points: Vec<(f64, f64)>, y_label: &str) -> String {
    Plot {
        title,
        x_label: "t",
        y_label,
        y_range: None,
        series: vec![Series {
            label: y_label.into(),
            colour: "#1f4e9c",
            points,
        }],
    }
    .render()
}

pub fn simulate(a: SimulateArgs, sink: &Sink) -> CliResult<()> {
    let fmt = sink.format_or(Format::Csv, &[Format::Csv, Format::Json, Format::Svg], "simulate")?;
    let system = a.system.system()?;
    let start = StateClassical::new(req(a.x0, "x0")?, req(a.v0, "v0")?, 0.0)?;
    let t_end = req(a.t_end, "t-end")?;
    let tol = a.tol.unwrap_or(1e-10);
    let traj: Trajectory = match a.samples {
        Some(n) if n >= 2 => {
            let times: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
            integrate_sampled(&system, start, &times, tol)?
        }
        Some(n) => return validation(format!("--samples must be at least 2, got {n}")),
        None => integrate(&system, start, t_end, tol)?,
    };
    let text = match fmt {
        Format::Csv => traj.to_csv(),
        Format::Json => to_json(&traj),
        Format::Svg => trajectory_plot("x(t)", traj.samples.iter().map(|s| (s.t, s.x)).collect(), "x"),
    };
    sink.write(&text)
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PeriodScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Comma-separated turning-point amplitudes `x(0) = A`, `ẋ(0) = 0`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub amplitudes: Option<Vec<f64>>,
    /// Integrator tolerance [default: 1e-10].
    #[arg(long)]
    pub tol: Option<f64>,
}

pub fn period_scan(a: PeriodScanArgs, sink: &Sink) -> CliResult<()> {
    let fmt = sink.format_or(Format::Csv, &[Format::Csv, Format::Json], "period-scan")?;
    let amplitudes = a.amplitudes.clone().unwrap_or_default();
    if amplitudes.is_empty() {
        return validation("amplitude list is empty (use --amplitudes a,b,...)");
    }
    let tol = a.tol.unwrap_or(1e-10);
    let table = match a.system.family.unwrap_or(Family::Iso) {
        Family::Iso => isochronicity_scan_params(a.system.iso()?, &amplitudes, tol)?,
        _ => isochronicity_scan(&a.system.system()?, &amplitudes, tol)?,
    };
    sink.write(&match fmt {
        Format::Json => to_json(&table),
        _ => table.to_csv(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Closed,
    Numeric,
    Both,
}

pub fn parse_class(s: &str) -> CliResult<ClassTag> {
    match s.to_ascii_uppercase().as_str() {
        "I+" | "I_PLUS" | "IPLUS" => Ok(ClassTag::IPlus),
        "I-" | "I_MINUS" | "IMINUS" => Ok(ClassTag::IMinus),
        "II" => Ok(ClassTag::II),
        "GEN_I" => Ok(ClassTag::GenI),
        "GEN_II" => Ok(ClassTag::GenII),
        _ => validation(format!("unknown class '{s}'; expected I+, I- or II")),
    }
}

/// Ordering parameters, by preset name or explicitly.
#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct OrderingArgs {
    /// ben-daniel-duke, gora-williams, zhu-kroemer, li-kuhn or mustafa [default: zhu-kroemer].
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
}

impl OrderingArgs {
    fn scheme(&self) -> CliResult<OrderingScheme> {
        match (self.alpha, self.beta, self.gamma) {
            (None, None, None) => Ok(OrderingScheme::preset(self.preset.as_deref().unwrap_or("zhu-kroemer"))?),
            (Some(a), Some(b), Some(g)) if self.preset.is_none() => Ok(OrderingScheme::new(a, b, g)?),
            (Some(_), Some(_), Some(_)) => validation("give either --preset or --alpha/--beta/--gamma, not both"),
            _ => validation("--alpha, --beta and --gamma must be given together"),
        }
    }
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GridArgs {
    /// Intervals of the coarse grid [default: 4000].
    #[arg(long)]
    pub n_coarse: Option<usize>,
    /// Intervals of the fine grid [default: 8000].
    #[arg(long)]
    pub n_fine: Option<usize>,
    /// Box length; chosen from the turning points when omitted.
    #[arg(long)]
    pub length: Option<f64>,
    /// Accepted relative error estimate [default: 1e-4].
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        let d = GridSpec::default();
        GridSpec {
            n_coarse: self.n_coarse.unwrap_or(d.n_coarse),
            n_fine: self.n_fine.unwrap_or(d.n_fine),
            length: self.length.or(d.length),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            ..d
        }
    }
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SpectrumArgs {
    /// I+, I- or II.
    #[arg(long, allow_hyphen_values = true)]
    pub class: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub ordering: OrderingArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Number of levels [default: 5].
    #[arg(long)]
    pub levels: Option<usize>,
    /// [default: both for class II, numeric for class I]
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
}

pub fn spectrum(a: SpectrumArgs, sink: &Sink) -> CliResult<()> {
    let fmt = sink.format_or(Format::Csv, &[Format::Csv, Format::Json], "spectrum")?;
    let class = parse_class(a.class.as_deref().unwrap_or("II"))?;
    let scheme = a.ordering.scheme()?;
    let params = IsochronousParams::new(req(a.k, "k")?, req(a.omega, "omega")?)?;
    let levels = a.levels.unwrap_or(5);
    if levels == 0 {
        return validation("--levels must be at least 1");
    }
    let model = match class {
        ClassTag::IPlus | ClassTag::IMinus => HamiltonianModel::class_i(params, class == ClassTag::IPlus)?,
        ClassTag::II => HamiltonianModel::class_ii(params)?,
        _ => return validation("spectra are available for classes I+, I- and II"),
    };
    let pot = effective_potential(&model, &scheme)?;
    let method = a.method.unwrap_or(if class == ClassTag::II { Method::Both } else { Method::Numeric });
    if class != ClassTag::II && method != Method::Numeric {
        return validation("class I has no closed-form spectrum for general (k, omega); use --method numeric");
    }
    let closed = match method {
        Method::Closed | Method::Both => Some(closed_form_spectrum_ii(
            params.k,
            params.omega,
            scheme.epsilon(),
            levels - 1,
        )?),
        Method::Numeric => None,
    };
    let numeric: Option<SpectrumResult> = match method {
        Method::Numeric | Method::Both => Some(numeric_eigensolve(&pot, levels, &a.grid.spec())?),
        Method::Closed => None,
    };
    let text = match fmt {
        Format::Json => to_json(&json!({
            "class": class,
            "ordering": scheme,
            "epsilon": scheme.epsilon(),
            "effective_potential": pot,
            "closed": closed,
            "numeric": numeric,
        })),
        _ => SpectrumResult::comparison_csv(closed.as_ref(), numeric.as_ref()),
    };
    sink.write(&text)
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ResolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a0: Option<f64>,
    /// Frequency of the trial solution [default: omega].
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
}

pub fn resolve_denominator(a: ResolveArgs, sink: &Sink) -> CliResult<()> {
    let fmt = sink.format_or(Format::Json, &[Format::Csv, Format::Json], "resolve-denominator")?;
    let omega = req(a.omega, "omega")?;
    let res = resolve(req(a.k, "k")?, omega, req(a.a0, "a0")?, a.theta.unwrap_or(omega))?;
    sink.write(&match fmt {
        Format::Csv => csv_records(
            &["chosen", "denom_scale", "residual_three_omega", "residual_three_theta"],
            &[vec![
                format!("{:?}", res.chosen),
                fmt_f64(res.denom_scale),
                fmt_f64(res.residual_three_omega),
                fmt_f64(res.residual_three_theta),
            ]],
        ),
        _ => to_json(&res),
    })
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CertificateArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha1: Option<f64>,
    /// [default: 1 when built from --k/--omega]
    #[arg(long, allow_negative_numbers = true)]
    pub alpha2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c_minus1: Option<f64>,
    /// Build the special case that reduces to the isochronous equation with this k.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Target frequency squared [default: c1].
    #[arg(long, allow_negative_numbers = true)]
    pub omega2: Option<f64>,
}

pub fn certificate(a: CertificateArgs, sink: &Sink) -> CliResult<()> {
    let fmt = sink.format_or(Format::Json, &[Format::Csv, Format::Json], "certificate")?;
    let ls = match (a.k, a.omega) {
        (Some(k), Some(omega)) => {
            if a.alpha1.is_some() || a.c1.is_some() || a.c_minus1.is_some() {
                return validation("give either --k/--omega or --alpha1/--c1/--c-minus1, not both");
            }
            IsochronousParams::new(k, omega)?;
            SpecialCaseLS::for_isochronous(k, omega, a.alpha2.unwrap_or(1.0))
        }
        (None, None) => SpecialCaseLS {
            alpha1: req(a.alpha1, "alpha1")?,
            alpha2: req(a.alpha2, "alpha2")?,
            c1: req(a.c1, "c1")?,
            c_minus1: req(a.c_minus1, "c-minus1")?,
        },
        _ => return validation("--k and --omega must be given together"),
    };
    let cert = build_certificate(&ls, a.omega2.unwrap_or(ls.c1))?;
    sink.write(&match fmt {
        Format::Csv => csv_records(
            &["A_coeff", "B_coeff", "Omega2", "valid", "residual_1", "residual_2", "residual_3", "mismatch"],
            &[vec![
                fmt_f64(cert.a_coeff),
                fmt_f64(cert.b_coeff),
                fmt_f64(cert.omega2),
                cert.valid.to_string(),
                fmt_f64(cert.residuals[0]),
                fmt_f64(cert.residuals[1]),
                fmt_f64(cert.residuals[2]),
                fmt_f64(cert.mismatch),
            ]],
        ),
        _ => to_json(&json!({ "system": ls, "certificate": cert })),
    })
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ChielliniArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
}

pub fn chiellini(a: ChielliniArgs, sink: &Sink) -> CliResult<()> {
    let fmt = sink.format_or(Format::Json, &[Format::Csv, Format::Json], "chiellini")?;
    let res = chiellini_roots(&a.system.system()?);
    sink.write(&match fmt {
        Format::Csv => {
            let rows: Vec<Vec<f64>> = res.roots.iter().zip(&res.residuals).map(|(&l, &r)| vec![l, r]).collect();
            csv_string(&["ell", "residual"], &rows)
        }
        _ => to_json(&res),
    })
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FlowArgs {
    /// I+, I- or II.
    #[arg(long, allow_hyphen_values = true)]
    pub class: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Initial rescaled momentum; alternatively give --v0.
    #[arg(long, allow_negative_numbers = true)]
    pub ptilde0: Option<f64>,
    /// Initial velocity, converted to p̃ on the model's branch.
    #[arg(long, allow_negative_numbers = true)]
    pub v0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Integrator tolerance [default: 1e-11].
    #[arg(long)]
    pub tol: Option<f64>,
}

pub fn flow(a: FlowArgs, sink: &Sink) -> CliResult<()> {
    let fmt = sink.format_or(Format::Csv, &[Format::Csv, Format::Json, Format::Svg], "flow")?;
    let class = parse_class(req(a.class.as_deref(), "class")?)?;
    let params = IsochronousParams::new(req(a.k, "k")?, req(a.omega, "omega")?)?;
    let model = match class {
        ClassTag::IPlus | ClassTag::IMinus => HamiltonianModel::class_i(params, class == ClassTag::IPlus)?,
        ClassTag::II => HamiltonianModel::class_ii(params)?,
        _ => return validation("flow is available for classes I+, I- and II"),
    };
    let x0 = req(a.x0, "x0")?;
    let p0 = match (a.ptilde0, a.v0) {
        (Some(p), None) => p,
        (None, Some(v)) => model.ptilde_from_velocity(x0, v)?,
        _ => return validation("give exactly one of --ptilde0 and --v0"),
    };
    let traj = hamilton_flow(&model, x0, p0, req(a.t_end, "t-end")?, a.tol.unwrap_or(1e-11))?;
    let text = match fmt {
        Format::Csv => traj.to_csv(),
        Format::Json => to_json(&json!({
            "model": ModelDescriptor::from(&model),
            "energy_drift": traj.energy_drift(),
            "samples": traj.samples(),
        })),
        Format::Svg => trajectory_plot("x(t)", traj.samples().iter().map(|r| (r[0], r[1])).collect(), "x"),
    };
    sink.write(&text)
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct WavefunctionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ordering: OrderingArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Level index [default: 0].
    #[arg(long)]
    pub n: Option<usize>,
    /// Grid end [default: three classical turning points].
    #[arg(long)]
    pub s_max: Option<f64>,
    /// Grid points [default: 20001].
    #[arg(long)]
    pub points: Option<usize>,
}

pub fn wavefunction(a: WavefunctionArgs, sink: &Sink) -> CliResult<()> {
    let fmt = sink.format_or(Format::Csv, &[Format::Csv, Format::Json, Format::Svg], "wavefunction")?;
    let eps = a.ordering.scheme()?.epsilon();
    let (k, omega, n) = (req(a.k, "k")?, req(a.omega, "omega")?, a.n.unwrap_or(0));
    let auto = WaveGrid::for_level(k, omega, eps, n)?;
    let grid = WaveGrid {
        s_max: a.s_max.unwrap_or(auto.s_max),
        points: a.points.unwrap_or(auto.points),
    };
    let wf = eigenfunction_ii(k, omega, eps, n, &grid)?;
    let text = match fmt {
        Format::Csv => wf.to_csv(),
        Format::Json => to_json(&wf),
        Format::Svg => Plot {
            title: "class II eigenfunction",
            x_label: "s",
            y_label: "phi".into(),
            y_range: None,
            series: vec![Series {
                label: "phi".into(),
                colour: "#1f4e9c",
                points: wf.s.iter().copied().zip(wf.phi.iter().copied()).collect(),
            }],
        }
        .render(),
    };
    sink.write(&text)
}

#[derive(Args, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct BoundScanArgs {
    /// Highest Hermite index [default: 3].
    #[arg(long)]
    pub n_max: Option<usize>,
    /// [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// [default: 0.1]
    #[arg(long, allow_negative_numbers = true)]
    pub k_min: Option<f64>,
    /// [default: 10]
    #[arg(long, allow_negative_numbers = true)]
    pub k_max: Option<f64>,
}

pub fn bound_scan(a: BoundScanArgs, sink: &Sink) -> CliResult<()> {
    let fmt = sink.format_or(Format::Json, &[Format::Csv, Format::Json], "bound-scan")?;
    let scan = boundstate_scan_i(
        a.n_max.unwrap_or(3),
        a.omega.unwrap_or(1.0),
        (a.k_min.unwrap_or(0.1), a.k_max.unwrap_or(10.0)),
    )?;
    sink.write(&match fmt {
        Format::Csv => csv_records(
            &["n", "k_star", "level", "numeric_level", "eigen_residual"],
            &scan
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        fmt_f64(r.k_star),
                        fmt_f64(r.level),
                        fmt_f64(r.numeric_level),
                        fmt_f64(r.eigen_residual),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        _ => to_json(&scan),
    })
}
