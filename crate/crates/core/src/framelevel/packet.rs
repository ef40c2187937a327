use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::time::Tick;

/// One frame of agent channels, the payload of the OSC output.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FramePacket {
    pub frame: u64,
    pub tick: Tick,
    /// Sparse AU intensities in `[0, 1]`.
    pub au: BTreeMap<u16, f32>,
    /// (x, y, z) radians.
    pub head: Option<[f32; 3]>,
    /// (x, y) radians.
    pub gaze: Option<[f32; 2]>,
    /// Viseme weights in `[0, 1]`.
    pub mouth: BTreeMap<String, f32>,
    /// Body joint rotations keyed `<joint>.<axis>`, radians.
    pub joints: BTreeMap<String, f32>,
}

impl FramePacket {
    pub fn at(frame: u64, tick: Tick) -> Self {
        FramePacket {
            frame,
            tick,
            ..Default::default()
        }
    }

    pub fn t(&self) -> f64 {
        self.tick.secs()
    }

    /// No channel populated.
    pub fn is_empty(&self) -> bool {
        self.au.is_empty()
            && self.head.is_none()
            && self.gaze.is_none()
            && self.mouth.is_empty()
            && self.joints.is_empty()
    }

    pub fn channel_count(&self) -> usize {
        self.au.len()
            + self.head.is_some() as usize
            + self.gaze.is_some() as usize
            + self.mouth.len()
            + self.joints.len()
    }

    /// Flat `name -> value` view used by the frame-stream file format.
    pub fn channel_map(&self) -> BTreeMap<String, f32> {
        let mut out = BTreeMap::new();
        for (au, v) in &self.au {
            out.insert(format!("AU{au}"), *v);
        }
        if let Some([x, y, z]) = self.head {
            out.insert("HEAD_X".into(), x);
            out.insert("HEAD_Y".into(), y);
            out.insert("HEAD_Z".into(), z);
        }
        if let Some([x, y]) = self.gaze {
            out.insert("GAZE_X".into(), x);
            out.insert("GAZE_Y".into(), y);
        }
        for (v, w) in &self.mouth {
            out.insert(format!("VISEME:{v}"), *w);
        }
        for (j, r) in &self.joints {
            out.insert(format!("JOINT:{j}"), *r);
        }
        out
    }
}

/// One line of the frame-stream file: `{"frame":0,"t":0.0,"channels":{...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: u64,
    pub t: f64,
    pub channels: BTreeMap<String, f32>,
}

impl From<&FramePacket> for FrameRecord {
    fn from(p: &FramePacket) -> Self {
        FrameRecord {
            frame: p.frame,
            t: p.t(),
            channels: p.channel_map(),
        }
    }
}

/// Newline-delimited JSON, one record per frame.
pub fn write_frame_stream<W: std::io::Write>(mut out: W, frames: &[FramePacket]) -> std::io::Result<()> {
    for p in frames {
        serde_json::to_writer(&mut out, &FrameRecord::from(p))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_frame_stream(text: &str) -> Result<Vec<FrameRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
