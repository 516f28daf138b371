use serde::{Deserialize, Serialize};

pub const CHANNELS: usize = 44;
pub const PAC_BATCH: usize = 22;
pub const ELECTRODES: usize = 19;

/// One 100 Hz tactile sample.
///
/// Flat channel order: `p_dc`, `p_ac[0..22]`, `electrodes[0..19]`, `t_dc`, `t_ac`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorFrame {
    pub tick: u64,
    pub p_dc: f64,
    pub p_ac: [f64; PAC_BATCH],
    pub electrodes: [f64; ELECTRODES],
    pub t_dc: f64,
    pub t_ac: f64,
}

impl SensorFrame {
    pub fn from_channels(tick: u64, ch: &[f64; CHANNELS]) -> Self {
        let mut p_ac = [0.0; PAC_BATCH];
        p_ac.copy_from_slice(&ch[1..1 + PAC_BATCH]);
        let mut electrodes = [0.0; ELECTRODES];
        electrodes.copy_from_slice(&ch[1 + PAC_BATCH..1 + PAC_BATCH + ELECTRODES]);
        Self {
            tick,
            p_dc: ch[0],
            p_ac,
            electrodes,
            t_dc: ch[CHANNELS - 2],
            t_ac: ch[CHANNELS - 1],
        }
    }

    pub fn channels(&self) -> [f64; CHANNELS] {
        let mut ch = [0.0; CHANNELS];
        ch[0] = self.p_dc;
        ch[1..1 + PAC_BATCH].copy_from_slice(&self.p_ac);
        ch[1 + PAC_BATCH..1 + PAC_BATCH + ELECTRODES].copy_from_slice(&self.electrodes);
        ch[CHANNELS - 2] = self.t_dc;
        ch[CHANNELS - 1] = self.t_ac;
        ch
    }

    pub fn is_finite(&self) -> bool {
        self.channels().iter().all(|v| v.is_finite())
    }

    pub fn p_ac_mean(&self) -> f64 {
        self.p_ac.iter().sum::<f64>() / PAC_BATCH as f64
    }

    pub fn p_ac_variance(&self) -> f64 {
        let m = self.p_ac_mean();
        self.p_ac.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / PAC_BATCH as f64
    }

    pub fn p_ac_peak_to_peak(&self) -> f64 {
        let (lo, hi) = self
            .p_ac
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        hi - lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_layout() {
        let mut ch = [0.0; CHANNELS];
        for (i, c) in ch.iter_mut().enumerate() {
            *c = i as f64;
        }
        let f = SensorFrame::from_channels(7, &ch);
        assert_eq!(f.p_dc, 0.0);
        assert_eq!(f.p_ac[0], 1.0);
        assert_eq!(f.p_ac[21], 22.0);
        assert_eq!(f.electrodes[0], 23.0);
        assert_eq!(f.electrodes[18], 41.0);
        assert_eq!(f.t_dc, 42.0);
        assert_eq!(f.t_ac, 43.0);
        assert_eq!(f.channels(), ch);
    }
}
