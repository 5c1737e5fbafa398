//! Generated matplotlib scripts that redraw a figure from a CSV written by
//! the CLI. Scripts only need Python 3 and matplotlib.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Which figure layout a script draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    /// Bounds overlay without the precoder.
    Bounds,
    /// Precoder on and off.
    PhaseRotation,
    /// BER against SNR.
    Snr,
    /// BER against maximum Doppler.
    Doppler,
    /// BER against maximum delay.
    Delay,
    /// Roll-off curves against Doppler and delay.
    Rolloff,
}

impl FigureKind {
    pub fn name(self) -> &'static str {
        match self {
            FigureKind::Bounds => "bounds",
            FigureKind::PhaseRotation => "phase_rotation",
            FigureKind::Snr => "ber_snr",
            FigureKind::Doppler => "ber_doppler",
            FigureKind::Delay => "ber_delay",
            FigureKind::Rolloff => "rolloff",
        }
    }
}

const SWEEP_BODY: &str = r#"
rows = list(csv.DictReader(open(CSV)))
axes_names = sorted({r["axis_name"] for r in rows})
fig, axes = plt.subplots(1, len(axes_names), figsize=(6 * len(axes_names), 4.5), squeeze=False)
for ax, name in zip(axes[0], axes_names):
    sub = [r for r in rows if r["axis_name"] == name]
    for scheme in dict.fromkeys(r["scheme"] for r in sub):
        pts = [r for r in sub if r["scheme"] == scheme]
        x = [float(r["axis_value"]) for r in pts]
        y = [float(r["ber"]) for r in pts]
        e = [float(r["ci_halfwidth"]) for r in pts]
        ax.errorbar(x, y, yerr=e, marker="o", capsize=2, label=scheme)
    ax.set_yscale("log")
    ax.set_xlabel(name)
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
fig.suptitle(TITLE)
fig.tight_layout()
fig.savefig(OUT, dpi=150)
print("wrote", OUT)
"#;

const BOUNDS_BODY: &str = r#"
rows = list(csv.DictReader(open(CSV)))
fig, ax = plt.subplots(figsize=(6, 4.5))
groups = dict.fromkeys((r["system"], r["profile"], r["with_pr"]) for r in rows)
for system, profile, pr in groups:
    pts = [r for r in rows if (r["system"], r["profile"], r["with_pr"]) == (system, profile, pr)]
    tag = f"{system}/{profile}" + (" PR" if pr == "true" else "")
    x = [float(r["snr_db"]) for r in pts]
    sim = [float(r["ber"]) if float(r["ber"]) > 0 else float("nan") for r in pts]
    line, = ax.semilogy(x, sim, "o", label=f"{tag} simulated")
    if SHOW_BOUNDS:
        ax.semilogy(x, [float(r["upper"]) for r in pts], "-", color=line.get_color(), label=f"{tag} upper")
        ax.semilogy(x, [float(r["lower"]) for r in pts], "--", color=line.get_color(), label=f"{tag} lower")
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("BER")
ax.grid(True, which="both", alpha=0.3)
ax.legend(fontsize=8)
fig.suptitle(TITLE)
fig.tight_layout()
fig.savefig(OUT, dpi=150)
print("wrote", OUT)
"#;

fn py_str(s: &str) -> String {
    let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}

/// Expression locating the CSV from the script: a sibling file stays
/// relative, anything else is absolute.
fn csv_expr(csv: &Path, script: &Path) -> Result<String> {
    let dir_of = |p: &Path| p.parent().map(Path::to_path_buf).unwrap_or_default();
    let same_dir = match (std::fs::canonicalize(dir_of(csv).join(".")), std::fs::canonicalize(dir_of(script).join("."))) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    if same_dir {
        let name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        return Ok(format!("os.path.join(os.path.dirname(os.path.abspath(__file__)), {})", py_str(&name)));
    }
    let abs: PathBuf = std::fs::canonicalize(csv).map_err(|e| Error::io(csv, e))?;
    Ok(py_str(&abs.to_string_lossy()))
}

/// Script text for `kind` reading `csv` from the location of `script`.
pub fn plot_script(kind: FigureKind, csv: &Path, script: &Path) -> Result<String> {
    let (title, body, bounds) = match kind {
        FigureKind::Bounds => ("BER and union bounds", BOUNDS_BODY, true),
        FigureKind::PhaseRotation => ("BER with and without phase rotation", BOUNDS_BODY, false),
        FigureKind::Snr => ("BER against SNR", SWEEP_BODY, false),
        FigureKind::Doppler => ("BER against maximum Doppler", SWEEP_BODY, false),
        FigureKind::Delay => ("BER against maximum delay", SWEEP_BODY, false),
        FigureKind::Rolloff => ("DZT-OTFS BER for several roll-offs", SWEEP_BODY, false),
    };
    let out = format!("{}.png", kind.name());
    let mut text = String::from("#!/usr/bin/env python3\nimport csv\nimport os\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n");
    text += &format!("CSV = {}\n", csv_expr(csv, script)?);
    text += &format!(
        "OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), {})\n",
        py_str(&out)
    );
    text += &format!("TITLE = {}\n", py_str(title));
    if body == BOUNDS_BODY {
        text += &format!("SHOW_BOUNDS = {}\n", if bounds { "True" } else { "False" });
    }
    text += body;
    Ok(text)
}

pub fn write_plot_script(kind: FigureKind, csv: &Path, script: &Path) -> Result<()> {
    let text = plot_script(kind, csv, script)?;
    std::fs::write(script, text).map_err(|e| Error::io(script, e))
}
