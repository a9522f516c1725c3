//! Command-line front end for `dualdomain`: WAV I/O, single-file
//! reconstruction and the encode/decode experiment grid.

pub mod app;
pub mod experiment;
pub mod reconstruct;
pub mod signals;
pub mod wav;

use dualdomain::frame::FrameBuilder;
use dualdomain::{FrameSpec, WindowKind};
use serde::{Deserialize, Serialize};

/// Gabor frame parameters shared by every subcommand and the grid config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields)]
pub struct FrameArgs {
    /// Window length in samples.
    #[arg(long, default_value_t = 2048)]
    pub window_length: usize,
    /// Hop size in samples.
    #[arg(long, default_value_t = 1024)]
    pub hop: usize,
    /// Number of frequency channels.
    #[arg(long, default_value_t = 2048)]
    pub channels: usize,
    #[arg(long, value_enum, default_value_t = WindowArg::Sine)]
    pub window: WindowArg,
}

impl Default for FrameArgs {
    fn default() -> Self {
        Self {
            window_length: 2048,
            hop: 1024,
            channels: 2048,
            window: WindowArg::Sine,
        }
    }
}

impl FrameArgs {
    /// Parseval frame for signals of `signal_length` samples.
    pub fn build(&self, signal_length: usize) -> dualdomain::Result<FrameSpec> {
        FrameBuilder::new(self.window_length, self.hop, self.channels)
            .window(self.window.into())
            .build(signal_length)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WindowArg {
    #[default]
    Sine,
    Hann,
    Rectangular,
}

impl From<WindowArg> for WindowKind {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Sine => WindowKind::Sine,
            WindowArg::Hann => WindowKind::Hann,
            WindowArg::Rectangular => WindowKind::Rectangular,
        }
    }
}
