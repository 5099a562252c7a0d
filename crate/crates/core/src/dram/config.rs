//! DRAM geometry and timing parameters, loaded from key-value text files.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Bytes transferred by one request.
pub const LINE_BYTES: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Standard {
    Ddr3,
    Ddr4,
    Hbm,
}

impl fmt::Display for Standard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Standard::Ddr3 => "DDR3",
            Standard::Ddr4 => "DDR4",
            Standard::Hbm => "HBM",
        })
    }
}

impl FromStr for Standard {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DDR3" => Ok(Standard::Ddr3),
            "DDR4" => Ok(Standard::Ddr4),
            "HBM" => Ok(Standard::Hbm),
            other => Err(Error::DramConfig(format!("unknown standard {other:?}"))),
        }
    }
}

/// Timing parameters in DRAM clock cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timings {
    pub cl: u64,
    pub rcd: u64,
    pub rp: u64,
    pub ras: u64,
    pub rtp: u64,
    pub wr: u64,
    pub ccd_s: u64,
    pub ccd_l: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DramConfig {
    pub name: String,
    pub standard: Standard,
    pub channels: usize,
    pub ranks: usize,
    pub banks_per_rank: usize,
    pub bank_groups: usize,
    pub row_buffer_bytes: u64,
    /// Mega-transfers per second.
    pub data_rate: u64,
    pub bus_bits: u64,
    pub burst_length: u64,
    /// Density of one device in bits.
    pub capacity_bits: u64,
    pub devices_per_rank: u64,
    pub tck_ns: f64,
    pub timings: Timings,
}

const PRESETS: [(&str, &str, &str); 5] = [
    (
        "ddr4",
        "DDR4-2400",
        include_str!("../../configs/ddr4-2400.cfg"),
    ),
    (
        "ddr4-jedec",
        "DDR4-2400-JEDEC",
        include_str!("../../configs/ddr4-2400-jedec.cfg"),
    ),
    (
        "ddr3",
        "DDR3-2133",
        include_str!("../../configs/ddr3-2133.cfg"),
    ),
    (
        "ddr3-1600",
        "DDR3-1600",
        include_str!("../../configs/ddr3-1600.cfg"),
    ),
    (
        "hbm",
        "HBM-1000",
        include_str!("../../configs/hbm-1000.cfg"),
    ),
];

impl DramConfig {
    /// Built-in configurations: `ddr4`, `ddr4-jedec`, `ddr3`, `ddr3-1600`, `hbm`.
    pub fn preset(name: &str) -> Result<DramConfig> {
        let key = name.to_ascii_lowercase();
        PRESETS
            .iter()
            .find(|(k, full, _)| *k == key || full.eq_ignore_ascii_case(&key))
            .map(|(_, full, text)| DramConfig::parse(full, text))
            .unwrap_or_else(|| {
                Err(Error::DramConfig(format!(
                    "unknown preset {name:?} (expected one of {})",
                    PRESETS.map(|p| p.0).join(", ")
                )))
            })
    }

    pub fn ddr4() -> DramConfig {
        DramConfig::preset("ddr4").expect("built-in preset")
    }

    pub fn ddr3() -> DramConfig {
        DramConfig::preset("ddr3").expect("built-in preset")
    }

    pub fn hbm() -> DramConfig {
        DramConfig::preset("hbm").expect("built-in preset")
    }

    /// Resolves a preset name or a path to a configuration file.
    pub fn load(name_or_path: &str) -> Result<DramConfig> {
        let path = Path::new(name_or_path);
        if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let stem = path.file_stem().map_or(name_or_path.to_string(), |s| {
                s.to_string_lossy().into_owned()
            });
            DramConfig::parse(&stem, &text)
        } else {
            DramConfig::preset(name_or_path)
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. `tCK` is optional and
    /// defaults to the period implied by `data_rate`.
    pub fn parse(name: &str, text: &str) -> Result<DramConfig> {
        let mut kv = std::collections::HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::DramConfig(format!("{name}:{}: expected key = value", i + 1))
            })?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| -> Result<&String> {
            kv.get(k)
                .ok_or_else(|| Error::DramConfig(format!("{name}: missing key {k}")))
        };
        let num = |k: &str| -> Result<u64> {
            get(k)?
                .parse::<u64>()
                .map_err(|_| Error::DramConfig(format!("{name}: {k} is not an integer")))
        };
        let data_rate = num("data_rate")?;
        let tck_ns = match kv.get("tCK") {
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| Error::DramConfig(format!("{name}: tCK is not a number")))?,
            None if data_rate > 0 => 2000.0 / data_rate as f64,
            None => 0.0,
        };
        let cfg = DramConfig {
            name: name.to_string(),
            standard: get("standard")?.parse()?,
            channels: num("channels")? as usize,
            ranks: num("ranks")? as usize,
            banks_per_rank: num("banks_per_rank")? as usize,
            bank_groups: num("bank_groups")? as usize,
            row_buffer_bytes: num("row_buffer_bytes")?,
            data_rate,
            bus_bits: num("bus_bits")?,
            burst_length: num("burst_length")?,
            capacity_bits: num("capacity_bits")?,
            devices_per_rank: num("devices_per_rank")?,
            tck_ns,
            timings: Timings {
                cl: num("tCL")?,
                rcd: num("tRCD")?,
                rp: num("tRP")?,
                ras: num("tRAS")?,
                rtp: num("tRTP")?,
                wr: num("tWR")?,
                ccd_s: num("tCCD_S")?,
                ccd_l: num("tCCD_L")?,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::DramConfig(format!("{}: {m}", self.name)));
        if self.bus_bits * self.burst_length / 8 != LINE_BYTES {
            return fail(format!(
                "bus_bits x burst_length / 8 = {} but one request must carry {LINE_BYTES} bytes",
                self.bus_bits * self.burst_length / 8
            ));
        }
        if self.channels == 0 || self.ranks == 0 || self.banks_per_rank == 0 {
            return fail("channels, ranks and banks must be positive".into());
        }
        if self.bank_groups == 0 || !self.banks_per_rank.is_multiple_of(self.bank_groups) {
            return fail("banks_per_rank must be a multiple of bank_groups".into());
        }
        if self.standard == Standard::Ddr4 && self.bank_groups < 2 {
            return fail("DDR4 needs at least two bank groups".into());
        }
        if self.row_buffer_bytes < LINE_BYTES || !self.row_buffer_bytes.is_multiple_of(LINE_BYTES) {
            return fail("row_buffer_bytes must be a multiple of 64".into());
        }
        if self.tck_ns.is_nan() || self.tck_ns <= 0.0 || self.data_rate == 0 {
            return fail("clock period and data rate must be positive".into());
        }
        if !self.burst_length.is_multiple_of(2) {
            return fail("burst_length must be even".into());
        }
        if self.timings.ccd_s == 0 || self.timings.ccd_l < self.timings.ccd_s {
            return fail("require 0 < tCCD_S <= tCCD_L".into());
        }
        if self.channel_capacity() < self.row_buffer_bytes * self.banks_total() as u64 {
            return fail("capacity smaller than one row per bank".into());
        }
        Ok(())
    }

    pub fn with_channels(mut self, channels: usize) -> DramConfig {
        self.channels = channels;
        self
    }

    /// Cycles the data bus is occupied by one request.
    pub fn burst_cycles(&self) -> u64 {
        self.burst_length / 2
    }

    /// Bytes per second per channel.
    pub fn peak_bandwidth(&self) -> f64 {
        self.data_rate as f64 * 1e6 * self.bus_bits as f64 / 8.0
    }

    pub fn banks_total(&self) -> usize {
        self.ranks * self.banks_per_rank
    }

    pub fn channel_capacity(&self) -> u64 {
        self.ranks as u64 * self.devices_per_rank * self.capacity_bits / 8
    }

    /// Splits a channel-local address into (rank, bank group, bank within
    /// group, row, column byte). Column bits are lowest, then bank group,
    /// bank, rank and row.
    pub fn decode(&self, address: u64) -> Result<Location> {
        let capacity = self.channel_capacity();
        if address >= capacity {
            return Err(Error::AddressOutOfRange { address, capacity });
        }
        let column = address % self.row_buffer_bytes;
        let mut rest = address / self.row_buffer_bytes;
        let bank_group = (rest % self.bank_groups as u64) as usize;
        rest /= self.bank_groups as u64;
        let per_group = (self.banks_per_rank / self.bank_groups) as u64;
        let bank = (rest % per_group) as usize;
        rest /= per_group;
        let rank = (rest % self.ranks as u64) as usize;
        let row = rest / self.ranks as u64;
        Ok(Location {
            rank,
            bank_group,
            bank,
            row,
            column,
        })
    }

    pub(crate) fn flat_bank(&self, loc: &Location) -> usize {
        let per_group = self.banks_per_rank / self.bank_groups;
        (loc.rank * self.bank_groups + loc.bank_group) * per_group + loc.bank
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub rank: usize,
    pub bank_group: usize,
    pub bank: usize,
    pub row: u64,
    pub column: u64,
}

impl fmt::Display for DramConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} x{}ch, {} MT/s, {}B rows)",
            self.name, self.standard, self.channels, self.data_rate, self.row_buffer_bytes
        )
    }
}
