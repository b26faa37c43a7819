use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use fcforest::bench::run_bench;
use fcforest::io::{
    gen_synthetic, load_csv, save_csv, score_grid, write_grid_csv, GridBounds, LabelColumn, SyntheticSpec,
};
use fcforest::model_file::{load_model, save_model};
use fcforest::{fit_forest, score_matrix, ForestConfig, LabeledDataset};

use crate::args::{Command, ForestArgs, SynthKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fcforest::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Json(_) => "format",
            CliError::Pool(_) => "runtime",
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn dispatch(command: Command, threads: Option<usize>) -> Result<()> {
    match command {
        Command::Fit {
            data,
            out,
            label_col,
            forest,
        } => fit(&data, &out, &label_col, &forest, threads),
        Command::Score {
            model,
            data,
            out,
            label_col,
        } => score(&model, &data, &out, &label_col),
        Command::Bench {
            data,
            runs,
            label_col,
            json,
            forest,
        } => bench(&data, runs, &label_col, json.as_deref(), &forest, threads),
        Command::Synth {
            kind,
            size,
            outlier,
            seed,
            out,
        } => synth(kind, size, outlier, seed, &out),
        Command::Grid {
            model,
            bounds,
            resolution,
            out,
        } => grid(&model, &bounds, resolution, &out),
    }
}

/// Writes to stdout; a closed reader (e.g. `| head`) is not an error.
fn stdout(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load(path: &Path, label_col: &str) -> Result<LabeledDataset> {
    let label: LabelColumn = label_col.parse().unwrap_or(LabelColumn::Last);
    Ok(load_csv(path, &label)?)
}

fn resolve(forest: &ForestArgs, threads: Option<usize>, rows: usize) -> Result<ForestConfig> {
    let config = forest.run_config(threads).resolve()?;
    if config.sample_size > rows {
        eprintln!(
            "warning: sample size {} exceeds the {rows} rows available; using {rows}",
            config.sample_size
        );
    }
    Ok(config)
}

fn fit(data: &Path, out: &Path, label_col: &str, forest: &ForestArgs, threads: Option<usize>) -> Result<()> {
    let dataset = load(data, label_col)?;
    let config = resolve(forest, threads, dataset.matrix.rows())?;
    let start = Instant::now();
    let model = fit_forest(&dataset.matrix, &config)?;
    let seconds = start.elapsed().as_secs_f64();
    save_model(&model, out)?;
    stdout(&format!(
        "trees: {}\nnodes: {}\nq: {}\nsample_size: {}\nseconds: {seconds:.4}\n",
        model.trees().len(),
        model.total_nodes(),
        model.normalizer(),
        model.sample_size()
    ))
}

fn score(model_path: &Path, data: &Path, out: &Path, label_col: &str) -> Result<()> {
    let model = load_model::<f64>(model_path)?;
    let dataset = load(data, label_col)?;
    let scores = score_matrix(&dataset.matrix, &model)?;
    let mut w = BufWriter::new(File::create(out)?);
    writeln!(w, "row_index,score")?;
    for (i, s) in scores.iter().enumerate() {
        writeln!(w, "{i},{s}")?;
    }
    w.flush()?;
    Ok(())
}

fn bench(
    data: &Path,
    runs: usize,
    label_col: &str,
    json: Option<&Path>,
    forest: &ForestArgs,
    threads: Option<usize>,
) -> Result<()> {
    let dataset = load(data, label_col)?;
    let config = resolve(forest, threads, dataset.matrix.rows())?;
    let result = run_bench(&dataset, &forest.label(), &config, runs)?;
    stdout(&result.to_table())?;
    match json {
        Some(p) if p == Path::new("-") => stdout(&(serde_json::to_string_pretty(&result)? + "\n"))?,
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            serde_json::to_writer_pretty(&mut w, &result)?;
            writeln!(w)?;
            w.flush()?;
        }
        None => {}
    }
    Ok(())
}

fn synth(kind: SynthKind, size: usize, outlier: Vec<f64>, seed: u64, out: &Path) -> Result<()> {
    if outlier.len() != 2 {
        return Err(CliError::Usage("--outlier takes two values, x,y".into()));
    }
    let spec = match kind {
        SynthKind::Bimodal => SyntheticSpec::bimodal(size, seed),
        SynthKind::Blob => SyntheticSpec::blob_with_outlier(size, outlier, seed),
    };
    let dataset: LabeledDataset = gen_synthetic(&spec)?;
    save_csv(&dataset, out)?;
    stdout(&format!("rows: {}\n", dataset.matrix.rows()))
}

fn grid(model_path: &Path, bounds: &[f64], resolution: usize, out: &Path) -> Result<()> {
    if bounds.len() != 4 {
        return Err(CliError::Usage("--bounds takes four values, x0,x1,y0,y1".into()));
    }
    let model = load_model::<f64>(model_path)?;
    let bounds = GridBounds {
        x: (bounds[0], bounds[1]),
        y: (bounds[2], bounds[3]),
    };
    let points = score_grid(&model, bounds, resolution)?;
    let mut w = BufWriter::new(File::create(out)?);
    write_grid_csv(&points, &mut w)?;
    w.flush()?;
    Ok(())
}
