//! 60 GHz mmWave link model.
//!
//! Everything here is a pure function of value inputs: path loss, the
//! Gaussian-reference sector antenna pattern, interference, thermal noise,
//! Shannon capacity, the IEEE 802.11ad MCS lookup, per-service QoS and the
//! coverage-cone radius.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geom::Vec3;
use crate::{Error, Result};

/// Separations below this are clamped before evaluating the log-distance
/// path loss.
pub const MIN_DISTANCE_M: f64 = 1.0;

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Radio constants of a single Tx/Rx pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub a_db: f64,
    pub f_ghz: f64,
    pub n_exp: f64,
    pub bandwidth_hz: f64,
    pub g_tx_dbi: f64,
    pub p_tx_dbm: f64,
    pub g_rx_dbi: f64,
    pub eirp_cap_dbm: f64,
    pub noise_density_dbm_hz: f64,
    /// Implementation loss plus noise figure.
    pub sys_loss_db: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            a_db: 32.5,
            f_ghz: 60.0,
            n_exp: 2.0,
            bandwidth_hz: 2.16e9,
            g_tx_dbi: 19.0,
            p_tx_dbm: 24.0,
            g_rx_dbi: 3.0,
            eirp_cap_dbm: 43.0,
            noise_density_dbm_hz: -174.0,
            sys_loss_db: 15.0,
        }
    }
}

impl LinkBudget {
    /// Builds a budget, rejecting EIRP above the regulatory cap.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0 && self.f_ghz > 0.0 && self.n_exp > 0.0) {
            return Err(Error::Config(
                "link budget needs bandwidth_hz, f_ghz and n_exp > 0".into(),
            ));
        }
        if self.eirp_dbm() > self.eirp_cap_dbm {
            return Err(Error::Config(format!(
                "EIRP {} dBm (g_tx_dbi + p_tx_dbm) exceeds cap {} dBm",
                self.eirp_dbm(),
                self.eirp_cap_dbm
            )));
        }
        Ok(())
    }

    pub fn eirp_dbm(&self) -> f64 {
        self.g_tx_dbi + self.p_tx_dbm
    }
}

/// Log-distance path loss in dB.
pub fn path_loss_db(d_m: f64, b: &LinkBudget) -> Result<f64> {
    if !(d_m > 0.0) || !d_m.is_finite() {
        return Err(Error::Domain(format!("path loss distance {d_m} m must be > 0")));
    }
    let d = d_m.max(MIN_DISTANCE_M);
    Ok(b.a_db + 20.0 * b.f_ghz.log10() + 10.0 * b.n_exp * d.log10())
}

/// Received power of a served (beam-aligned) link.
pub fn rx_power_dbm(d_m: f64, b: &LinkBudget) -> Result<f64> {
    Ok(b.eirp_dbm() - path_loss_db(d_m, b)? + b.g_rx_dbi)
}

/// Thermal noise power over the channel bandwidth, in mW.
pub fn noise_mw(b: &LinkBudget) -> f64 {
    dbm_to_mw(b.noise_density_dbm_hz + 10.0 * b.bandwidth_hz.log10() + b.sys_loss_db)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaPattern {
    pub g_max_dbi: f64,
    /// Azimuth 3 dB beamwidth, degrees.
    pub phi3_deg: f64,
    /// Elevation 3 dB beamwidth, degrees.
    pub theta3_deg: f64,
}

impl Default for AntennaPattern {
    fn default() -> Self {
        AntennaPattern {
            g_max_dbi: 19.0,
            phi3_deg: 10.0,
            theta3_deg: 10.0,
        }
    }
}

impl AntennaPattern {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi3_deg > 0.0 && self.theta3_deg > 0.0) {
            return Err(Error::Config("antenna beamwidths must be > 0".into()));
        }
        Ok(())
    }

    /// Normalized off-axis measure Δ. Ω† is kept in degrees so it shares
    /// units with the beamwidths.
    pub fn delta(&self, phi_deg: f64, theta_deg: f64) -> f64 {
        let (phi, theta) = (phi_deg.to_radians(), theta_deg.to_radians());
        let omega_dag = (phi.cos() * theta.cos()).clamp(-1.0, 1.0).acos().to_degrees();
        let psi = theta.tan().atan2(phi.sin());
        let omega_star =
            ((psi.cos() / self.phi3_deg).powi(2) + (psi.sin() / self.theta3_deg).powi(2)).sqrt();
        (omega_dag * omega_star).abs()
    }
}

/// Sector antenna gain at azimuth/elevation offset from boresight.
pub fn antenna_gain_dbi(phi_deg: f64, theta_deg: f64, p: &AntennaPattern) -> f64 {
    let delta = p.delta(phi_deg, theta_deg);
    if delta < 1.0 {
        p.g_max_dbi - 12.0 * delta * delta
    } else {
        p.g_max_dbi - 12.0 - 15.0 * delta.ln()
    }
}

/// Azimuth and elevation (degrees) of `dir` in the local frame whose forward
/// axis is `boresight` and whose horizon is the world x-y plane.
pub fn beam_angles_deg(boresight: Vec3, dir: Vec3) -> (f64, f64) {
    let (Some(fwd), Some(u)) = (boresight.normalized(), dir.normalized()) else {
        return (0.0, 0.0);
    };
    let right = fwd
        .cross(Vec3::UP)
        .normalized()
        .unwrap_or_else(|| fwd.cross(Vec3::new(1.0, 0.0, 0.0)).normalized().unwrap());
    let up = right.cross(fwd);
    let phi = u.dot(right).atan2(u.dot(fwd));
    let theta = u.dot(up).clamp(-1.0, 1.0).asin();
    (phi.to_degrees(), theta.to_degrees())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub tx_pos: Vec3,
    pub rx_pos: Vec3,
    /// Direction the Tx beam points (toward its own associated receiver).
    pub tx_boresight: Vec3,
}

impl LinkGeometry {
    /// Link whose beam is aimed straight at its receiver.
    pub fn aimed(tx_pos: Vec3, rx_pos: Vec3) -> Self {
        LinkGeometry {
            tx_pos,
            rx_pos,
            tx_boresight: rx_pos - tx_pos,
        }
    }
}

/// Aggregate interference at the victim's receiver from the given
/// transmitters, in mW.
pub fn interference_mw(
    victim: &LinkGeometry,
    interferers: &[LinkGeometry],
    b: &LinkBudget,
    p: &AntennaPattern,
) -> Result<f64> {
    let mut total = 0.0;
    for i in interferers {
        let to_victim = victim.rx_pos - i.tx_pos;
        let d = to_victim.norm();
        if d <= 0.0 {
            return Err(Error::Domain(
                "interferer transmitter is co-located with the victim receiver".into(),
            ));
        }
        let (phi, theta) = beam_angles_deg(i.tx_boresight, to_victim);
        let g = antenna_gain_dbi(phi, theta, p);
        total += dbm_to_mw(g + b.p_tx_dbm - path_loss_db(d, b)?);
    }
    Ok(total)
}

/// Shannon capacity in bit/s.
pub fn capacity_bps(rx_mw: f64, interf_mw: f64, noise_mw: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(noise_mw > 0.0) {
        return Err(Error::Domain(format!("noise power {noise_mw} mW must be > 0")));
    }
    Ok(bandwidth_hz * (1.0 + rx_mw / (noise_mw + interf_mw)).log2())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsRow {
    pub sensitivity_dbm: f64,
    pub mcs_id: String,
    pub rate_mbps: f64,
}

/// Receive-sensitivity to data-rate lookup, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsTable {
    rows: Vec<McsRow>,
}

pub const MCS_SCHEMA: &str = "uavbs-mcs/1";

/// IEEE 802.11ad single-carrier MCS sensitivities and PHY rates.
pub const IEEE_80211AD_MCS: [(f64, &str, f64); 12] = [
    (-78.0, "MCS0", 27.5),
    (-68.0, "MCS1", 385.0),
    (-66.0, "MCS2", 770.0),
    (-65.0, "MCS3", 962.5),
    (-64.0, "MCS4", 1155.0),
    (-63.0, "MCS6", 1540.0),
    (-62.0, "MCS7", 1925.0),
    (-61.0, "MCS8", 2310.0),
    (-59.0, "MCS9", 2502.5),
    (-55.0, "MCS10", 3080.0),
    (-54.0, "MCS11", 3850.0),
    (-53.0, "MCS12", 4620.0),
];

/// The same table as shipped in text form.
pub const IEEE_80211AD_MCS_TEXT: &str = include_str!("../data/mcs_80211ad.txt");

impl Default for McsTable {
    fn default() -> Self {
        McsTable::ieee_80211ad()
    }
}

impl McsTable {
    pub fn new(rows: Vec<McsRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Config("MCS table is empty".into()));
        }
        for w in rows.windows(2) {
            if !(w[1].sensitivity_dbm > w[0].sensitivity_dbm && w[1].rate_mbps > w[0].rate_mbps) {
                return Err(Error::Config(format!(
                    "MCS rows must strictly increase in sensitivity and rate ({} -> {})",
                    w[0].mcs_id, w[1].mcs_id
                )));
            }
        }
        Ok(McsTable { rows })
    }

    pub fn ieee_80211ad() -> Self {
        let rows = IEEE_80211AD_MCS
            .iter()
            .map(|&(s, id, r)| McsRow {
                sensitivity_dbm: s,
                mcs_id: id.to_string(),
                rate_mbps: r,
            })
            .collect();
        McsTable { rows }
    }

    pub fn rows(&self) -> &[McsRow] {
        &self.rows
    }

    /// Parses `sensitivity_dbm mcs_id rate_mbps` rows (whitespace or comma
    /// separated). Lines starting with `#` are comments.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            let [s, id, r] = fields[..] else {
                return Err(format!("line {}: expected 3 fields, got {}", n + 1, fields.len()));
            };
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|e| format!("line {}: bad number {v:?}: {e}", n + 1))
            };
            rows.push(McsRow {
                sensitivity_dbm: num(s)?,
                mcs_id: id.to_string(),
                rate_mbps: num(r)?,
            });
        }
        McsTable::new(rows).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        McsTable::parse(&text).map_err(|m| Error::parse(path, m))
    }

    /// Highest row whose sensitivity is met.
    pub fn lookup(&self, rx_dbm: f64) -> Option<&McsRow> {
        self.rows.iter().rev().find(|r| r.sensitivity_dbm <= rx_dbm)
    }

    /// Supportable rate in Mbps, 0 below the lowest sensitivity.
    pub fn rate_mbps(&self, rx_dbm: f64) -> f64 {
        self.lookup(rx_dbm).map_or(0.0, |r| r.rate_mbps)
    }
}

pub fn mcs_rate_mbps(rx_dbm: f64, t: &McsTable) -> f64 {
    t.rate_mbps(rx_dbm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ServiceType {
    VideoStreaming,
    OnlineGaming,
    WebSurfing,
    VoIP,
}

impl ServiceType {
    pub const ALL: [ServiceType; 4] = [
        ServiceType::VideoStreaming,
        ServiceType::OnlineGaming,
        ServiceType::WebSurfing,
        ServiceType::VoIP,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    E,
    Ten,
    Two,
}

/// Weights of the two-branch QoS function (rates in Mbps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityParams {
    pub v_a: f64,
    pub w_a: f64,
    pub v_b: f64,
    pub w_b: f64,
    pub log_base: LogBase,
}

impl Default for QualityParams {
    fn default() -> Self {
        QualityParams {
            v_a: 0.01,
            w_a: 1024.0,
            v_b: 1.0,
            w_b: 1.0,
            log_base: LogBase::E,
        }
    }
}

impl QualityParams {
    pub fn eval(&self, rate_mbps: f64, s: ServiceType) -> f64 {
        match s {
            ServiceType::VideoStreaming => 1.0 / (1.0 + (-self.v_a * (rate_mbps - self.w_a)).exp()),
            _ => {
                let x = self.v_b * rate_mbps + self.w_b;
                match self.log_base {
                    LogBase::E => x.ln(),
                    LogBase::Ten => x.log10(),
                    LogBase::Two => x.log2(),
                }
            }
        }
    }
}

/// QoS of a UE receiving `rate_mbps` under the default weights.
pub fn quality(rate_mbps: f64, s: ServiceType) -> f64 {
    QualityParams::default().eval(rate_mbps, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CoverageFormula {
    /// Ground footprint of the beam cone: `(H_uav - H_ue) * tan(bw/2)`.
    #[default]
    #[serde(rename = "cone")]
    Cone,
    /// Height ratio times `tan(bw/2)`; dimensionless and sub-meter.
    #[serde(rename = "as-printed")]
    AsPrinted,
}

impl CoverageFormula {
    pub fn radius_m(self, uav_alt_m: f64, ue_alt_m: f64, beamwidth_deg: f64) -> f64 {
        if uav_alt_m <= ue_alt_m {
            return 0.0;
        }
        let t = (beamwidth_deg.to_radians() / 2.0).tan();
        match self {
            CoverageFormula::Cone => (uav_alt_m - ue_alt_m) * t,
            CoverageFormula::AsPrinted => (uav_alt_m - ue_alt_m) / uav_alt_m * t,
        }
    }
}

pub fn coverage_radius_m(uav_alt_m: f64, ue_alt_m: f64, beamwidth_deg: f64) -> f64 {
    CoverageFormula::Cone.radius_m(uav_alt_m, ue_alt_m, beamwidth_deg)
}

/// `[radio]` section of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub a_db: f64,
    pub f_ghz: f64,
    pub n_exp: f64,
    pub bandwidth_hz: f64,
    pub g_tx_dbi: f64,
    pub p_tx_dbm: f64,
    pub g_rx_dbi: f64,
    pub eirp_cap_dbm: f64,
    pub noise_density_dbm_hz: f64,
    pub sys_loss_db: f64,
    pub phi3_deg: f64,
    pub theta3_deg: f64,
    pub mcs_table: Option<PathBuf>,
    pub quality: QualityParams,
    pub coverage_formula: CoverageFormula,
}

impl Default for RadioConfig {
    fn default() -> Self {
        let b = LinkBudget::default();
        let p = AntennaPattern::default();
        RadioConfig {
            a_db: b.a_db,
            f_ghz: b.f_ghz,
            n_exp: b.n_exp,
            bandwidth_hz: b.bandwidth_hz,
            g_tx_dbi: b.g_tx_dbi,
            p_tx_dbm: b.p_tx_dbm,
            g_rx_dbi: b.g_rx_dbi,
            eirp_cap_dbm: b.eirp_cap_dbm,
            noise_density_dbm_hz: b.noise_density_dbm_hz,
            sys_loss_db: b.sys_loss_db,
            phi3_deg: p.phi3_deg,
            theta3_deg: p.theta3_deg,
            mcs_table: None,
            quality: QualityParams::default(),
            coverage_formula: CoverageFormula::Cone,
        }
    }
}

impl RadioConfig {
    pub fn link_budget(&self) -> Result<LinkBudget> {
        LinkBudget {
            a_db: self.a_db,
            f_ghz: self.f_ghz,
            n_exp: self.n_exp,
            bandwidth_hz: self.bandwidth_hz,
            g_tx_dbi: self.g_tx_dbi,
            p_tx_dbm: self.p_tx_dbm,
            g_rx_dbi: self.g_rx_dbi,
            eirp_cap_dbm: self.eirp_cap_dbm,
            noise_density_dbm_hz: self.noise_density_dbm_hz,
            sys_loss_db: self.sys_loss_db,
        }
        .validated()
    }

    /// Resolves the full model; a relative `mcs_table` path is taken
    /// relative to `base_dir`.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<RadioModel> {
        let link = self.link_budget()?;
        let antenna = AntennaPattern {
            g_max_dbi: self.g_tx_dbi,
            phi3_deg: self.phi3_deg,
            theta3_deg: self.theta3_deg,
        };
        antenna.validate()?;
        let mcs = match &self.mcs_table {
            None => McsTable::ieee_80211ad(),
            Some(p) => {
                let path = match base_dir {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p.clone(),
                };
                McsTable::load(&path)?
            }
        };
        Ok(RadioModel {
            link,
            antenna,
            mcs,
            quality: self.quality,
            coverage: self.coverage_formula,
            noise_mw: noise_mw(&link),
        })
    }
}

/// Resolved radio model shared by every link in the world.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioModel {
    pub link: LinkBudget,
    pub antenna: AntennaPattern,
    pub mcs: McsTable,
    pub quality: QualityParams,
    pub coverage: CoverageFormula,
    pub noise_mw: f64,
}

impl Default for RadioModel {
    fn default() -> Self {
        RadioConfig::default().build(None).expect("default radio config is valid")
    }
}

impl RadioModel {
    /// Actual rate of a served link in Mbps. Interference is folded into an
    /// equivalent receive power (the level that yields the same Shannon
    /// capacity without interference) before the MCS lookup; the result is
    /// capped by the Shannon capacity of the link.
    pub fn link_rate_mbps(&self, rx_dbm: f64, interf_mw: f64) -> Result<f64> {
        let n = self.noise_mw;
        let effective_dbm = rx_dbm - 10.0 * (1.0 + interf_mw / n).log10();
        let mcs = self.mcs.rate_mbps(effective_dbm);
        let shannon = capacity_bps(dbm_to_mw(rx_dbm), interf_mw, n, self.link.bandwidth_hz)? / 1e6;
        Ok(mcs.min(shannon))
    }
}

impl fmt::Display for ServiceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ServiceType::VideoStreaming => "video",
            ServiceType::OnlineGaming => "gaming",
            ServiceType::WebSurfing => "web",
            ServiceType::VoIP => "voip",
        };
        f.write_str(s)
    }
}

impl FromStr for CoverageFormula {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cone" => Ok(CoverageFormula::Cone),
            "as-printed" => Ok(CoverageFormula::AsPrinted),
            _ => Err(format!("unknown coverage formula {s:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Hand computations, done before the implementation:
    //   20*log10(60) = 35.5630;  32.5 + 35.5630 = 68.0630
    //   10*log10(2.16e9) = 93.3445; -174 + 93.3445 + 15 = -65.6555 dBm
    const PL_1M: f64 = 68.0630;

    #[test]
    fn path_loss_oracles() {
        let b = LinkBudget::default();
        for (d, want) in [(1.0, PL_1M), (10.0, PL_1M + 20.0), (100.0, PL_1M + 40.0)] {
            assert!((path_loss_db(d, &b).unwrap() - want).abs() < 1e-3, "d={d}");
        }
    }

    #[test]
    fn path_loss_domain() {
        let b = LinkBudget::default();
        assert!(path_loss_db(0.0, &b).is_err());
        assert!(path_loss_db(-3.0, &b).is_err());
        assert!(path_loss_db(f64::NAN, &b).is_err());
        // sub-meter separations are clamped
        assert_eq!(path_loss_db(0.2, &b).unwrap(), path_loss_db(1.0, &b).unwrap());
    }

    #[test]
    fn rx_power_oracles() {
        let b = LinkBudget::default();
        assert!((rx_power_dbm(100.0, &b).unwrap() - (43.0 - (PL_1M + 40.0) + 3.0)).abs() < 1e-3);
        assert!((rx_power_dbm(1.0, &b).unwrap() - (-22.063)).abs() < 1e-3);
    }

    #[test]
    fn eirp_cap_enforced() {
        assert!(LinkBudget::default().validated().is_ok());
        let too_hot = LinkBudget {
            g_tx_dbi: 20.0,
            ..LinkBudget::default()
        };
        assert!(too_hot.validated().is_err());
        let bad_bw = LinkBudget {
            bandwidth_hz: 0.0,
            ..LinkBudget::default()
        };
        assert!(bad_bw.validated().is_err());
    }

    #[test]
    fn noise_floor() {
        let b = LinkBudget::default();
        assert!((mw_to_dbm(noise_mw(&b)) - (-65.6555)).abs() < 1e-3);
        let one_hz = LinkBudget {
            bandwidth_hz: 1.0,
            sys_loss_db: 0.0,
            ..b
        };
        assert_relative_eq!(noise_mw(&one_hz), 10f64.powf(-17.4), max_relative = 1e-12);
        let wide = LinkBudget {
            bandwidth_hz: 2.0 * b.bandwidth_hz,
            ..b
        };
        let gain = mw_to_dbm(noise_mw(&wide)) - mw_to_dbm(noise_mw(&b));
        assert!((gain - 10.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn antenna_pattern_points() {
        let p = AntennaPattern::default();
        assert_eq!(antenna_gain_dbi(0.0, 0.0, &p), p.g_max_dbi);
        // phi = 10 deg on the horizon: Omega_dag = 10 deg, Omega_star = 1/10
        assert!((p.delta(10.0, 0.0) - 1.0).abs() < 1e-12);
        assert!((antenna_gain_dbi(10.0, 0.0, &p) - (p.g_max_dbi - 12.0)).abs() < 1e-9);
        // Delta = e: Omega_dag = 10e degrees
        let phi = 10.0 * std::f64::consts::E;
        assert!((antenna_gain_dbi(phi, 0.0, &p) - (p.g_max_dbi - 27.0)).abs() < 1e-9);
        // elevation-only offset behaves the same with equal beamwidths
        assert!((antenna_gain_dbi(0.0, 10.0, &p) - (p.g_max_dbi - 12.0)).abs() < 1e-9);
    }

    #[test]
    fn antenna_gain_continuous_and_monotone() {
        let p = AntennaPattern::default();
        let below = antenna_gain_dbi(10.0 - 1e-9, 0.0, &p);
        let above = antenna_gain_dbi(10.0 + 1e-9, 0.0, &p);
        assert!((below - above).abs() < 1e-6);
        let mut last = f64::INFINITY;
        for i in 0..=180 {
            let g = antenna_gain_dbi(i as f64, 0.0, &p);
            assert!(g <= last + 1e-12);
            last = g;
        }
    }

    #[test]
    fn beam_angles_match_total_offset() {
        let b = Vec3::new(1.0, 0.5, -2.0);
        let d = Vec3::new(-0.3, 2.0, -1.0);
        let (phi, theta) = beam_angles_deg(b, d);
        let want = (b.dot(d) / (b.norm() * d.norm())).acos();
        let got = (phi.to_radians().cos() * theta.to_radians().cos()).acos();
        assert!((want - got).abs() < 1e-12);
        // straight-down boresight has no horizon; fallback frame still works
        let (phi, theta) = beam_angles_deg(-Vec3::UP, -Vec3::UP);
        assert!(phi.abs() < 1e-12 && theta.abs() < 1e-12);
    }

    #[test]
    fn interference_cases() {
        let b = LinkBudget::default();
        let p = AntennaPattern::default();
        let victim = LinkGeometry::aimed(Vec3::new(0.0, 0.0, 100.0), Vec3::ZERO);
        assert_eq!(interference_mw(&victim, &[], &b, &p).unwrap(), 0.0);

        let tx = Vec3::new(100.0, 0.0, 0.0);
        let aimed = LinkGeometry::aimed(tx, Vec3::new(200.0, 0.0, 0.0));
        let aimed = LinkGeometry {
            tx_boresight: victim.rx_pos - tx,
            ..aimed
        };
        let want = dbm_to_mw(19.0 + 24.0 - (PL_1M + 40.0));
        let got = interference_mw(&victim, &[aimed], &b, &p).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-3);

        let sideways = LinkGeometry {
            tx_boresight: Vec3::new(0.0, 1.0, 0.0),
            ..aimed
        };
        assert!(interference_mw(&victim, &[sideways], &b, &p).unwrap() < got);

        let colocated = LinkGeometry::aimed(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0));
        assert!(interference_mw(&victim, &[colocated], &b, &p).is_err());
    }

    #[test]
    fn capacity_cases() {
        let b = LinkBudget::default();
        let n = noise_mw(&b);
        assert_eq!(capacity_bps(0.0, 0.0, n, b.bandwidth_hz).unwrap(), 0.0);
        assert!(capacity_bps(1.0, 0.0, 0.0, b.bandwidth_hz).is_err());
        // -62.063 dBm with no interference: SNR = 3.5925 dB -> 3.71 Gbit/s
        let rx = dbm_to_mw(rx_power_dbm(100.0, &b).unwrap());
        let c = capacity_bps(rx, 0.0, n, b.bandwidth_hz).unwrap();
        assert!((c / 1e9 - 3.71).abs() < 0.01, "{c}");
        // interference of 9x noise makes the denominator 10x noise
        let c9 = capacity_bps(rx, 9.0 * n, n, b.bandwidth_hz).unwrap();
        let c10 = capacity_bps(rx / 10.0, 0.0, n, b.bandwidth_hz).unwrap();
        assert_relative_eq!(c9, c10, max_relative = 1e-12);
    }

    #[test]
    fn capacity_monotone_on_grid() {
        let n = 1e-7;
        for i in 0..20 {
            let rx = 1e-9 * 2f64.powi(i);
            for j in 0..20 {
                let itf = 1e-9 * 2f64.powi(j);
                let c = capacity_bps(rx, itf, n, 1e9).unwrap();
                assert!(capacity_bps(rx * 1.01, itf, n, 1e9).unwrap() > c);
                assert!(capacity_bps(rx, itf * 1.01, n, 1e9).unwrap() < c);
            }
        }
    }

    #[test]
    fn mcs_lookup() {
        let t = McsTable::ieee_80211ad();
        assert_eq!(mcs_rate_mbps(-62.0, &t), 1925.0);
        assert_eq!(t.lookup(-62.0).unwrap().mcs_id, "MCS7");
        assert_eq!(mcs_rate_mbps(-62.063, &t), 1540.0);
        assert_eq!(mcs_rate_mbps(-80.0, &t), 0.0);
        assert_eq!(mcs_rate_mbps(0.0, &t), 4620.0);
    }

    #[test]
    fn shipped_table_text_matches_embedded_rows() {
        assert_eq!(McsTable::parse(IEEE_80211AD_MCS_TEXT).unwrap(), McsTable::ieee_80211ad());
        assert!(IEEE_80211AD_MCS_TEXT.starts_with(&format!("# {MCS_SCHEMA}")));
    }

    #[test]
    fn mcs_parse_rejects_bad_tables() {
        assert!(McsTable::parse("").is_err());
        assert!(McsTable::parse("-60 A 10\n-70 B 20\n").is_err());
        assert!(McsTable::parse("-70 A 10\n-60 B 5\n").is_err());
        assert!(McsTable::parse("-70 A\n").is_err());
        let t = McsTable::parse("# c\n-70, A, 10\n-60,B,20\n").unwrap();
        assert_eq!(t.rate_mbps(-65.0), 10.0);
    }

    #[test]
    fn quality_function() {
        assert!((quality(1024.0, ServiceType::VideoStreaming) - 0.5).abs() < 1e-15);
        assert_eq!(quality(0.0, ServiceType::WebSurfing), 0.0);
        assert!((quality(99.0, ServiceType::VoIP) - 100f64.ln()).abs() < 1e-12);
        let ten = QualityParams {
            log_base: LogBase::Ten,
            ..QualityParams::default()
        };
        assert!((ten.eval(99.0, ServiceType::OnlineGaming) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn coverage_radius_cases() {
        assert!((coverage_radius_m(2000.0, 0.0, 80.0) - 1678.199).abs() < 1e-2);
        assert_eq!(coverage_radius_m(2000.0, 2000.0, 80.0), 0.0);
        assert_eq!(coverage_radius_m(1500.0, 2000.0, 80.0), 0.0);
        assert!(coverage_radius_m(2000.0, 0.0, 1e-9) < 1e-6);
        assert!(coverage_radius_m(2500.0, 0.0, 80.0) > coverage_radius_m(2000.0, 0.0, 80.0));
        assert!(coverage_radius_m(2000.0, 500.0, 80.0) < coverage_radius_m(2000.0, 0.0, 80.0));
        let r = CoverageFormula::AsPrinted.radius_m(2000.0, 0.0, 80.0);
        assert!((r - (40f64).to_radians().tan()).abs() < 1e-12);
    }

    #[test]
    fn link_rate_without_interference_is_plain_mcs() {
        let m = RadioModel::default();
        for dbm in [-80.0, -78.0, -70.0, -62.0, -53.0, -40.0] {
            assert_eq!(m.link_rate_mbps(dbm, 0.0).unwrap(), m.mcs.rate_mbps(dbm));
        }
        // interference equal to the noise costs 3 dB
        let n = m.noise_mw;
        assert_eq!(m.link_rate_mbps(-62.0, n).unwrap(), m.mcs.rate_mbps(-65.0103));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn dbm_mw_inverse(dbm in -120.0f64..50.0) {
                let back = mw_to_dbm(dbm_to_mw(dbm));
                prop_assert!((back - dbm).abs() <= 1e-12 * dbm.abs().max(1.0));
            }

            #[test]
            fn path_loss_linear_in_log_distance(d in 1.0f64..1e5, k in 1.0f64..100.0) {
                let b = LinkBudget::default();
                let diff = path_loss_db(d * k, &b).unwrap() - path_loss_db(d, &b).unwrap();
                prop_assert!((diff - 10.0 * b.n_exp * k.log10()).abs() < 1e-9);
            }
        }
    }
}
