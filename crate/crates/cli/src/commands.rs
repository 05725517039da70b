use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use qmeta_core::frames;
use qmeta_core::io::{read_json, to_json_string};
use qmeta_core::metagrating::{self, SynthesisOptions};
use qmeta_core::polarization::{self, DensityMatrix, JonesVector};
use qmeta_core::reconstruction::{self, CountMeasure, HistogramData, Method, MleOptions};
use qmeta_core::simulator::{self, CorrelationSet, SourceModel, TransferMatrix};

use crate::manifest::RunManifest;
use crate::{
    AnalyzeArgs, Cli, Command, DesignArgs, FitArgs, Format, FrameArgs, GlobalOpts, MeasureArg,
    MethodArg, ReconstructArgs, SimulateArgs,
};

#[derive(Debug)]
pub struct NotConverged {
    pub iterations: usize,
}

impl std::fmt::Display for NotConverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "maximum-likelihood search did not converge after {} iterations; best iterate written",
            self.iterations
        )
    }
}

impl std::error::Error for NotConverged {}

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Frame(a) => frame(g, a),
        Command::Design(a) => design(g, a),
        Command::Simulate(a) => simulate(g, a),
        Command::Reconstruct(a) => reconstruct(g, a),
        Command::Analyze(a) => analyze(g, a),
        Command::Fit(a) => fit(g, a),
    }
}

/// Writes `content` to `--out` with a manifest, or to stdout.
fn emit(g: &GlobalOpts, command: &str, inputs: &[PathBuf], content: &str) -> Result<()> {
    match &g.out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
            RunManifest::new(command, inputs, g.seed)?.write_beside(path)
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Human-readable summary: stdout when the payload goes to a file, stderr
/// otherwise.
fn say(g: &GlobalOpts, text: &str) {
    if g.quiet {
        return;
    }
    if g.out.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
}

fn load_transfer(spec: &str, inputs: &mut Vec<PathBuf>) -> Result<TransferMatrix> {
    if spec == "published" {
        return Ok(TransferMatrix::published());
    }
    let path = PathBuf::from(spec);
    let t = read_json(&path).with_context(|| format!("loading transfer matrix {spec}"))?;
    inputs.push(path);
    Ok(t)
}

fn load<T: serde::de::DeserializeOwned>(
    path: &Path,
    what: &str,
    inputs: &mut Vec<PathBuf>,
) -> Result<T> {
    let v = read_json(path).with_context(|| format!("loading {what} {}", path.display()))?;
    inputs.push(path.to_path_buf());
    Ok(v)
}

fn json_only(g: &GlobalOpts, command: &str) -> Result<()> {
    if g.format == Format::Csv {
        bail!(qmeta_core::Error::InvalidInput(format!(
            "{command} output is JSON only"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct FrameOutput {
    ports: usize,
    condition_number: f64,
    vectors: Vec<JonesVector>,
    instrument_matrix: Vec<[f64; 4]>,
}

#[derive(Serialize)]
struct ConditionOutput {
    ports: usize,
    raw: f64,
    per_port: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_pair: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<Vec<(usize, usize)>>,
}

fn frame(g: &GlobalOpts, a: &FrameArgs) -> Result<()> {
    json_only(g, "frame")?;
    let mut inputs = Vec::new();
    if let Some(spec) = &a.transfer {
        let t = load_transfer(spec, &mut inputs)?;
        let r = frames::condition_report(&t)?;
        let out = ConditionOutput {
            ports: t.n_ports(),
            raw: r.raw,
            per_port: r.per_port,
            per_pair: r.per_pair,
            pairs: r
                .pairs
                .clone()
                .map(|p| p.into_iter().map(|(x, y)| (x + 1, y + 1)).collect()),
        };
        emit(g, "frame", &inputs, &to_json_string(&out)?)?;
        let mut s = String::new();
        for (name, k) in r.variants() {
            writeln!(s, "kappa ({name}) = {k:.7}")?;
        }
        say(g, &s);
        return Ok(());
    }
    let m = a.ports.expect("clap enforces --ports or --transfer");
    let frame = match &a.rotation {
        Some(q) => frames::platonic_frame_rotated(m, *q)?,
        None => frames::platonic_frame(m)?,
    };
    let im = frame.instrument_matrix();
    let kappa = im.condition_number();
    let out = FrameOutput {
        ports: m,
        condition_number: kappa,
        vectors: frame.ports().to_vec(),
        instrument_matrix: (0..m).map(|r| im.row(r)).collect(),
    };
    emit(g, "frame", &inputs, &to_json_string(&out)?)?;
    say(g, &format!("ports = {m}\nkappa = {kappa:.7}\n"));
    Ok(())
}

fn design(g: &GlobalOpts, a: &DesignArgs) -> Result<()> {
    let to_rad = |x: f64| if a.radians { x } else { x.to_radians() };
    let (alpha, beta) = (to_rad(a.alpha), to_rad(a.beta));
    let opts = SynthesisOptions {
        c1: to_rad(a.c1),
        lattice_constant_nm: a.lattice_nm,
    };
    let d = metagrating::synthesize_grating_with(alpha, beta, a.atoms, &opts)?;
    let content = match g.format {
        Format::Json => to_json_string(&d)?,
        Format::Csv => {
            let mut buf = Vec::new();
            d.write_csv(&mut buf)?;
            String::from_utf8(buf)?
        }
    };
    emit(g, "design", &[], &content)?;
    let (psi, perp) = d.pair();
    let s1 = metagrating::diffraction_spectrum(&d, &psi);
    let s2 = metagrating::diffraction_spectrum(&d, &perp);
    let mut s = String::from("order  psi       psi_perp\n");
    for (o1, o2) in s1.iter().zip(&s2) {
        writeln!(
            s,
            "{:>5}  {:.6}  {:.6}",
            o1.order, o1.efficiency, o2.efficiency
        )?;
    }
    say(g, &s);
    Ok(())
}

fn correlation_csv(c: &CorrelationSet) -> String {
    let mut s = String::new();
    let head: Vec<String> = (1..=c.n_photons()).map(|k| format!("port{k}")).collect();
    let _ = writeln!(s, "{},value", head.join(","));
    for (ports, v) in c.entries() {
        let p: Vec<String> = ports.iter().map(|x| (x + 1).to_string()).collect();
        let _ = writeln!(s, "{},{v}", p.join(","));
    }
    s
}

fn simulate(g: &GlobalOpts, a: &SimulateArgs) -> Result<()> {
    let mut inputs = Vec::new();
    let t = load_transfer(&a.transfer, &mut inputs)?;
    if let Some(ports) = &a.hom {
        let (p, q) = (ports[0], ports[1]);
        if p == 0 || q == 0 {
            bail!(qmeta_core::Error::InvalidInput(
                "port labels are 1-based".into()
            ));
        }
        let source = SourceModel::new(a.eta0, a.sigma_tau)?;
        let delays: Vec<f64> = match &a.delays {
            Some(d) => {
                let n = d[2];
                if !(n >= 2.0 && n.fract() == 0.0) {
                    bail!(qmeta_core::Error::InvalidInput(
                        "delay grid needs an integer point count >= 2".into()
                    ));
                }
                let n = n as usize;
                (0..n)
                    .map(|k| d[0] + (d[1] - d[0]) * k as f64 / (n - 1) as f64)
                    .collect()
            }
            None => (-80..=80).map(|k| k as f64 * 0.1 * a.sigma_tau).collect(),
        };
        let scan = simulator::hom_scan(&t, (p - 1, q - 1), &source, &delays)?;
        let mut s = String::from("delay,expected\n");
        for pt in &scan {
            writeln!(s, "{},{}", pt.delay, pt.expected)?;
        }
        emit(g, "simulate", &inputs, &s)?;
        let depth = simulator::hom_relative_depth(&t, (p - 1, q - 1), a.eta0)?;
        let kind = if depth >= 0.0 {
            "dip depth"
        } else {
            "peak height"
        };
        say(
            g,
            &format!(
                "ports ({p},{q}): relative {kind} {:.2}%\n",
                depth.abs() * 100.0
            ),
        );
        return Ok(());
    }
    let rho: DensityMatrix = match (&a.state, a.qwp) {
        (Some(path), _) => load(path, "state", &mut inputs)?,
        (None, Some(deg)) => simulator::qwp_state(deg.to_radians(), a.photons, None)?,
        (None, None) => bail!(qmeta_core::Error::InvalidInput(
            "give --state, --qwp or --hom".into()
        )),
    };
    let mut c = simulator::correlation_tensor(&t, &rho, a.photons)?;
    if a.normalize {
        c = c.normalized();
    }
    if let Some(shots) = a.shots {
        c = simulator::sample_counts(&c, shots, g.seed)?;
    }
    let content = match g.format {
        Format::Json => to_json_string(&c)?,
        Format::Csv => correlation_csv(&c),
    };
    emit(g, "simulate", &inputs, &content)?;
    say(
        g,
        &format!(
            "{} {}-fold tuples, total {:.6}\n",
            c.len(),
            c.n_photons(),
            c.total()
        ),
    );
    Ok(())
}

fn reconstruct(g: &GlobalOpts, a: &ReconstructArgs) -> Result<()> {
    json_only(g, "reconstruct")?;
    let mut inputs = Vec::new();
    let t = load_transfer(&a.transfer, &mut inputs)?;
    let counts: CorrelationSet = load(&a.counts, "counts", &mut inputs)?;
    let reference: Option<DensityMatrix> = a
        .reference
        .as_ref()
        .map(|p| load(p, "reference", &mut inputs))
        .transpose()?;
    let report = match a.method {
        MethodArg::Linear => {
            let rho = reconstruction::linear_reconstruct(&t, &counts)?;
            reconstruction::report(&rho, reference.as_ref(), Method::Linear)?
        }
        MethodArg::Mle => {
            let opts = MleOptions {
                max_iterations: a.max_iterations,
                ..MleOptions::default()
            };
            let r = reconstruction::mle_reconstruct(&t, &counts, &opts)?;
            reconstruction::mle_report(&r, reference.as_ref())?
        }
    };
    emit(g, "reconstruct", &inputs, &to_json_string(&report)?)?;
    let mut s = format!(
        "method = {:?}\npurity = {:.6}\n",
        report.method, report.purity
    )
    .to_lowercase();
    if !report.physical {
        writeln!(
            s,
            "estimate is not positive semidefinite (min eigenvalue {:.3e})",
            report.min_eigenvalue
        )?;
    }
    if let Some(c) = report.concurrence {
        writeln!(s, "concurrence = {c:.6}")?;
    }
    if let Some(f) = report.fidelity_vs_reference {
        writeln!(s, "fidelity = {f:.6}")?;
    }
    say(g, &s);
    if !report.converged {
        return Err(NotConverged {
            iterations: report.iterations,
        }
        .into());
    }
    Ok(())
}

#[derive(Serialize)]
struct Metrics {
    n_photons: usize,
    trace: f64,
    physical: bool,
    min_eigenvalue: f64,
    purity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    concurrence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity: Option<f64>,
}

fn analyze(g: &GlobalOpts, a: &AnalyzeArgs) -> Result<()> {
    let mut inputs = Vec::new();
    let rho: DensityMatrix = load(&a.rho, "state", &mut inputs)?;
    let reference: Option<DensityMatrix> = a
        .reference
        .as_ref()
        .map(|p| load(p, "reference", &mut inputs))
        .transpose()?;
    let fidelity = match &reference {
        Some(r) if r.n_photons() != rho.n_photons() => {
            bail!(qmeta_core::Error::DimensionMismatch {
                expected: format!("{}-photon reference", rho.n_photons()),
                found: format!("{}-photon reference", r.n_photons()),
            })
        }
        Some(r) => Some(polarization::fidelity(&rho, r)?),
        None => None,
    };
    let m = Metrics {
        n_photons: rho.n_photons(),
        trace: rho.trace(),
        physical: rho.is_physical(),
        min_eigenvalue: rho.min_eigenvalue(),
        purity: polarization::purity(&rho)?,
        concurrence: if rho.n_photons() == 2 && rho.is_physical() {
            Some(polarization::concurrence(&rho)?)
        } else {
            None
        },
        fidelity,
    };
    let mut table = format!(
        "metric,value\nn_photons,{}\ntrace,{}\nphysical,{}\nmin_eigenvalue,{}\npurity,{}\n",
        m.n_photons, m.trace, m.physical, m.min_eigenvalue, m.purity
    );
    if let Some(c) = m.concurrence {
        writeln!(table, "concurrence,{c}")?;
    }
    if let Some(f) = m.fidelity {
        writeln!(table, "fidelity,{f}")?;
    }
    match (g.format, &g.out) {
        (Format::Csv, _) => emit(g, "analyze", &inputs, &table)?,
        (Format::Json, Some(_)) => emit(g, "analyze", &inputs, &to_json_string(&m)?)?,
        (Format::Json, None) => {}
    }
    if g.format == Format::Json {
        let mut s = format!("purity      {:.4}\n", m.purity);
        if let Some(c) = m.concurrence {
            writeln!(s, "concurrence {c:.4}")?;
        }
        if let Some(f) = m.fidelity {
            writeln!(s, "fidelity    {f:.6}")?;
        }
        if !m.physical {
            writeln!(
                s,
                "not positive semidefinite (min eigenvalue {:.3e})",
                m.min_eigenvalue
            )?;
        }
        if g.out.is_some() {
            say(g, &s);
        } else {
            print!("{s}");
        }
    }
    Ok(())
}

fn fit(g: &GlobalOpts, a: &FitArgs) -> Result<()> {
    json_only(g, "fit")?;
    let h = HistogramData::from_csv_path(&a.histogram)
        .with_context(|| format!("loading {}", a.histogram.display()))?;
    let f = reconstruction::fit_histogram(&h)?;
    let measure = match a.measure {
        MeasureArg::Area => CountMeasure::Area,
        MeasureArg::Peak => CountMeasure::Peak,
    };
    emit(
        g,
        "fit",
        std::slice::from_ref(&a.histogram),
        &to_json_string(&f)?,
    )?;
    say(
        g,
        &format!(
            "amplitude = {:.4}\ncenter = {:.4} ns\nwidth = {:.4} ns\noffset = {:.4}\ncounts ({measure:?}) = {:.1}\n",
            f.amplitude,
            f.center,
            f.width,
            f.offset,
            f.measure(measure)
        ),
    );
    Ok(())
}
