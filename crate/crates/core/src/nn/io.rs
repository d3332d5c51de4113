//! Plain-text model files. Floats are written in Rust's shortest
//! round-trip form, so `load_model(&save_model(m))` is bit-exact.
//!
//! ```text
//! icu-lstm-model v1
//! task binary
//! frame_hours 6
//! hidden_units 64
//! ...
//! lstm_w <rows> <cols> <values...>
//! end
//! ```

use std::fmt::Write as _;
use std::str::SplitWhitespace;

use super::linalg::Matrix;
use super::lstm::{HeadParams, LstmParams, Network};
use super::model::{ModelConfig, Task, TrainedModel};
use super::NnError;
use crate::data::N_CHANNELS;
use crate::preprocess::{ChannelStats, Frame};

pub const MODEL_FORMAT: &str = "icu-lstm-model v1";

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v}");
    }
    s
}

fn write_matrix(out: &mut String, key: &str, m: &Matrix) {
    let _ = writeln!(
        out,
        "{key} {} {} {}",
        m.rows(),
        m.cols(),
        join(m.as_slice())
    );
}

fn write_vec(out: &mut String, key: &str, v: &[f64]) {
    let _ = writeln!(out, "{key} {} {}", v.len(), join(v));
}

pub fn save_model(model: &TrainedModel) -> String {
    let mut s = String::new();
    let c = &model.config;
    let _ = writeln!(s, "{MODEL_FORMAT}");
    let _ = writeln!(s, "task {}", model.task.name());
    let _ = writeln!(s, "frame_hours {}", model.frame.hours());
    let _ = writeln!(s, "hidden_units {}", c.hidden_units);
    let _ = writeln!(s, "dropout_rate {}", c.dropout_rate);
    let _ = writeln!(s, "learning_rate {}", c.learning_rate);
    let _ = writeln!(s, "epochs {}", c.epochs);
    let _ = writeln!(s, "batch_size {}", c.batch_size);
    let _ = writeln!(s, "folds {}", c.folds);
    let _ = writeln!(s, "seed {}", c.seed);
    write_vec(&mut s, "stats_mean", &model.stats.mean);
    write_vec(&mut s, "stats_sd", &model.stats.sd);
    write_vec(&mut s, "training_log", &model.training_log);
    write_matrix(&mut s, "lstm_w", &model.network.lstm.w);
    write_matrix(&mut s, "lstm_u", &model.network.lstm.u);
    write_vec(&mut s, "lstm_b", &model.network.lstm.b);
    write_matrix(&mut s, "head_w", &model.network.head.w);
    write_vec(&mut s, "head_b", &model.network.head.b);
    s.push_str("end\n");
    s
}

struct Tokens<'a> {
    inner: SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str, NnError> {
        self.inner
            .next()
            .ok_or_else(|| NnError::Format(format!("unexpected end of file, expected {what}")))
    }

    fn key(&mut self, key: &str) -> Result<(), NnError> {
        let found = self.next(key)?;
        if found == key {
            Ok(())
        } else {
            Err(NnError::Format(format!(
                "expected `{key}`, found `{found}`"
            )))
        }
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, NnError> {
        let raw = self.next(what)?;
        raw.parse()
            .map_err(|_| NnError::Format(format!("bad value `{raw}` for {what}")))
    }

    fn field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, NnError> {
        self.key(key)?;
        self.parse(key)
    }

    fn floats(&mut self, what: &str, n: usize) -> Result<Vec<f64>, NnError> {
        (0..n).map(|_| self.parse::<f64>(what)).collect()
    }

    fn vec(&mut self, key: &str) -> Result<Vec<f64>, NnError> {
        let n: usize = self.field(key)?;
        self.floats(key, n)
    }

    fn matrix(&mut self, key: &str) -> Result<Matrix, NnError> {
        let rows: usize = self.field(key)?;
        let cols: usize = self.parse(key)?;
        let data = self.floats(key, rows * cols)?;
        Matrix::from_vec(rows, cols, data)
    }
}

fn row(v: Vec<f64>, what: &str) -> Result<[f64; N_CHANNELS], NnError> {
    v.try_into()
        .map_err(|_| NnError::Format(format!("{what} must have {N_CHANNELS} entries")))
}

pub fn load_model(text: &str) -> Result<TrainedModel, NnError> {
    let body = text
        .strip_prefix(MODEL_FORMAT)
        .ok_or_else(|| NnError::Format(format!("missing `{MODEL_FORMAT}` header")))?;
    let mut t = Tokens {
        inner: body.split_whitespace(),
    };
    let task = match t.field::<String>("task")?.as_str() {
        "binary" => Task::Binary,
        "multiclass" => Task::Multiclass,
        other => return Err(NnError::Format(format!("unknown task `{other}`"))),
    };
    let frame = Frame::try_from(t.field::<u32>("frame_hours")?)
        .map_err(|e| NnError::Format(e.to_string()))?;
    let config = ModelConfig {
        hidden_units: t.field("hidden_units")?,
        dropout_rate: t.field("dropout_rate")?,
        learning_rate: t.field("learning_rate")?,
        epochs: t.field("epochs")?,
        batch_size: t.field("batch_size")?,
        folds: t.field("folds")?,
        seed: t.field("seed")?,
    };
    let stats = ChannelStats {
        mean: row(t.vec("stats_mean")?, "stats_mean")?,
        sd: row(t.vec("stats_sd")?, "stats_sd")?,
    };
    let training_log = t.vec("training_log")?;
    let lstm = LstmParams {
        w: t.matrix("lstm_w")?,
        u: t.matrix("lstm_u")?,
        b: t.vec("lstm_b")?,
    };
    let head = HeadParams {
        w: t.matrix("head_w")?,
        b: t.vec("head_b")?,
    };
    t.key("end")?;

    let h = config.hidden_units;
    let shapes = [
        ("lstm_w rows", 4 * h, lstm.w.rows()),
        ("lstm_w cols", N_CHANNELS, lstm.w.cols()),
        ("lstm_u rows", 4 * h, lstm.u.rows()),
        ("lstm_u cols", h, lstm.u.cols()),
        ("lstm_b", 4 * h, lstm.b.len()),
        ("head_w rows", task.classes(), head.w.rows()),
        ("head_w cols", h, head.w.cols()),
        ("head_b", task.classes(), head.b.len()),
    ];
    for (what, expected, found) in shapes {
        if expected != found {
            return Err(NnError::Format(format!(
                "{what}: expected {expected}, found {found}"
            )));
        }
    }
    Ok(TrainedModel {
        network: Network { lstm, head },
        stats,
        task,
        frame,
        config,
        training_log,
    })
}
