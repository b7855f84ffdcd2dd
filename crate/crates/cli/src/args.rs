//! Minimal flag parser with a stable exit-code contract:
//! 0 = pass, 1 = property violation, 2 = usage or config error.

use std::path::PathBuf;

pub const USAGE: &str = "\
usage: fractal-chain <command> <config.json> [flags]

commands:
  verify     run identity suites (--suite green|q-invariance|theorem-bridge|harmonic|metric|all)
  audit      run structure audits (--check transitivity|b2|nested|ds-type|all)
  table      export chain and kernel tables as CSV (--out DIR)
  render     draw the weighted fractal as SVG or PPM (--out FILE, 2-D only)
  simulate   sample chain paths and compare occupancy with masses
  boundary   run boundary diagnostics on a pairs file (--pairs FILE)

flags:
  --depth N        table depth (default 4; boundary defaults to max of --depths)
  --suite S        verify suite selection (default all)
  --check C        audit selection (default all)
  --out PATH       output file or directory
  --paths M        simulated path count (default 100000)
  --seed K         generator seed (default 1)
  --depths A,B,C   truncation depths for boundary (default 4,6,8)
  --palette HEX    fill colour for render (default #13315c)
  --pairs FILE     eventually-periodic word pairs, one `u(c) u'(c')` per line
  --json           machine-readable output where supported
";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Verify,
    Audit,
    Table,
    Render,
    Simulate,
    Boundary,
}

#[derive(Debug)]
pub struct Invocation {
    pub command: Command,
    pub config_path: PathBuf,
    pub depth: Option<usize>,
    pub suite: String,
    pub check: String,
    pub out: Option<PathBuf>,
    pub paths: usize,
    pub seed: u64,
    pub json: bool,
    pub pairs: Option<PathBuf>,
    pub depths: Option<Vec<usize>>,
    pub palette: String,
    /// Hidden test hook: perturb one Green value before verification.
    pub corrupt_green: bool,
}

pub fn parse(args: impl Iterator<Item = String>) -> Result<Invocation, String> {
    let mut args = args.peekable();
    let command = match args.next().as_deref() {
        Some("verify") => Command::Verify,
        Some("audit") => Command::Audit,
        Some("table") => Command::Table,
        Some("render") => Command::Render,
        Some("simulate") => Command::Simulate,
        Some("boundary") => Command::Boundary,
        Some(other) => return Err(format!("unknown command {other:?}")),
        None => return Err("missing command".into()),
    };
    let config_path = match args.next() {
        Some(p) if !p.starts_with("--") => PathBuf::from(p),
        _ => return Err("missing config path".into()),
    };
    let mut inv = Invocation {
        command,
        config_path,
        depth: None,
        suite: "all".into(),
        check: "all".into(),
        out: None,
        paths: 100_000,
        seed: 1,
        json: false,
        pairs: None,
        depths: None,
        palette: "#13315c".into(),
        corrupt_green: false,
    };
    while let Some(flag) = args.next() {
        let mut value = |name: &str| -> Result<String, String> {
            args.next().ok_or_else(|| format!("{name} needs a value"))
        };
        match flag.as_str() {
            "--depth" => {
                inv.depth = Some(
                    value("--depth")?
                        .parse()
                        .map_err(|e| format!("--depth: {e}"))?,
                )
            }
            "--suite" => inv.suite = value("--suite")?,
            "--check" => inv.check = value("--check")?,
            "--out" => inv.out = Some(PathBuf::from(value("--out")?)),
            "--paths" => {
                inv.paths = value("--paths")?
                    .parse()
                    .map_err(|e| format!("--paths: {e}"))?
            }
            "--seed" => {
                inv.seed = value("--seed")?
                    .parse()
                    .map_err(|e| format!("--seed: {e}"))?
            }
            "--json" => inv.json = true,
            "--pairs" => inv.pairs = Some(PathBuf::from(value("--pairs")?)),
            "--depths" => {
                let list = value("--depths")?;
                let parsed: Result<Vec<usize>, _> =
                    list.split(',').map(|d| d.trim().parse()).collect();
                inv.depths = Some(parsed.map_err(|e| format!("--depths: {e}"))?);
            }
            "--palette" => inv.palette = value("--palette")?,
            "--corrupt-green" => inv.corrupt_green = true,
            other => return Err(format!("unknown flag {other:?}")),
        }
    }
    Ok(inv)
}
