//! Deployment geometry and system parameters.
//!
//! The default scenario is a single shopping aisle: two racks flank a
//! 4 m wide aisle, each 8.4 m long and 2.1 m tall with five shelves, and
//! 84 ceiling antennas (grouped in pairs) spread over the aisle. The
//! coordinate frame puts x along the aisle, y across it (rack faces at
//! y = 0 and y = 4) and z upward from the floor.
//!
//! Geometry is fully deterministic: the same configuration always yields
//! bit-identical layouts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All scenario scalars, strictly in SI units (W, J, s, m, Hz). dBm and
/// milliwatts appear only at I/O boundaries.
///
/// `slot_duration_s` is derived as `window_s / num_slots`, so the charging
/// window always equals `num_slots * slot_duration_s` by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParameters {
    /// Carrier frequency f_c [Hz].
    pub carrier_frequency_hz: f64,
    /// Required DC energy per receiver E [J].
    pub required_energy_j: f64,
    /// Number of time slots N.
    pub num_slots: usize,
    /// Charging window N*T [s].
    pub window_s: f64,
    /// Number of receivers K.
    pub num_receivers: usize,
    /// Number of transmit antennas M.
    pub num_antennas: usize,
    /// RF-to-DC conversion efficiency alpha (dimensionless, in (0, 1]).
    pub harvester_efficiency: f64,
    /// Minimum required received RF power beta [W].
    pub harvester_threshold_w: f64,
    /// Maximum transmit power per antenna P_max [W].
    pub max_power_per_antenna_w: f64,
}

impl Default for SystemParameters {
    fn default() -> Self {
        Self {
            carrier_frequency_hz: 0.917e9,
            required_energy_j: 0.5,
            num_slots: 84,
            window_s: 12.0 * 3600.0,
            num_receivers: 240,
            num_antennas: 84,
            harvester_efficiency: 0.16,
            harvester_threshold_w: 1.58e-5,
            max_power_per_antenna_w: 4.0,
        }
    }
}

impl SystemParameters {
    /// Slot duration T = window / N [s].
    pub fn slot_duration_s(&self) -> f64 {
        self.window_s / self.num_slots as f64
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(name, format!("must be positive, got {v}")))
            }
        }
        positive("carrier_frequency_hz", self.carrier_frequency_hz)?;
        positive("required_energy_j", self.required_energy_j)?;
        positive("window_s", self.window_s)?;
        positive("max_power_per_antenna_w", self.max_power_per_antenna_w)?;
        if self.num_slots == 0 {
            return Err(Error::config("num_slots", "must be at least 1"));
        }
        if self.num_receivers == 0 {
            return Err(Error::config("num_receivers", "must be at least 1"));
        }
        if self.num_antennas == 0 {
            return Err(Error::config("num_antennas", "must be at least 1"));
        }
        if !(self.harvester_efficiency > 0.0 && self.harvester_efficiency <= 1.0) {
            return Err(Error::config(
                "harvester_efficiency",
                format!("must lie in (0, 1], got {}", self.harvester_efficiency),
            ));
        }
        if !(self.harvester_threshold_w >= 0.0) {
            return Err(Error::config(
                "harvester_threshold_w",
                format!("must be >= 0, got {}", self.harvester_threshold_w),
            ));
        }
        Ok(())
    }
}

/// Partial overrides for [`SystemParameters`]; `None` keeps the default.
/// `slot_duration_s` may be given instead of (or along with) `window_s`;
/// if both are present they must agree with `num_slots` to within 1e-9
/// relative.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParameterOverrides {
    pub carrier_frequency_hz: Option<f64>,
    pub required_energy_j: Option<f64>,
    pub num_slots: Option<usize>,
    pub slot_duration_s: Option<f64>,
    pub window_s: Option<f64>,
    pub num_receivers: Option<usize>,
    pub num_antennas: Option<usize>,
    pub harvester_efficiency: Option<f64>,
    pub harvester_threshold_w: Option<f64>,
    pub max_power_per_antenna_w: Option<f64>,
    /// Ceiling height [m]; a geometry knob rather than a system scalar,
    /// but overridable from the same place.
    pub ceiling_height_m: Option<f64>,
}

impl ParameterOverrides {
    /// Apply to the defaults, checking consistency.
    pub fn apply(&self, base: &SystemParameters) -> Result<SystemParameters> {
        let mut p = base.clone();
        if let Some(v) = self.carrier_frequency_hz {
            p.carrier_frequency_hz = v;
        }
        if let Some(v) = self.required_energy_j {
            p.required_energy_j = v;
        }
        if let Some(v) = self.num_slots {
            p.num_slots = v;
        }
        if let Some(v) = self.num_receivers {
            p.num_receivers = v;
        }
        if let Some(v) = self.num_antennas {
            p.num_antennas = v;
        }
        if let Some(v) = self.harvester_efficiency {
            p.harvester_efficiency = v;
        }
        if let Some(v) = self.harvester_threshold_w {
            p.harvester_threshold_w = v;
        }
        if let Some(v) = self.max_power_per_antenna_w {
            p.max_power_per_antenna_w = v;
        }
        match (self.window_s, self.slot_duration_s) {
            (Some(w), None) => p.window_s = w,
            (None, Some(t)) => {
                if !(t > 0.0) {
                    return Err(Error::config("slot_duration_s", "must be positive"));
                }
                p.window_s = t * p.num_slots as f64;
            }
            (Some(w), Some(t)) => {
                let implied = t * p.num_slots as f64;
                if (implied - w).abs() > 1e-9 * w.abs().max(implied.abs()) {
                    return Err(Error::config(
                        "window_s",
                        format!(
                            "inconsistent with num_slots * slot_duration_s ({w} vs {implied})"
                        ),
                    ));
                }
                p.window_s = w;
            }
            (None, None) => {}
        }
        p.validate()?;
        Ok(p)
    }
}

/// A 3-D point in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Distance in the ceiling plane (x, y only).
    pub fn distance_xy(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Ceiling antenna positions. Antennas come in pairs; `pair_index[m]` is
/// the pair (transmitter unit) an antenna belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaLayout {
    pub positions: Vec<Point3>,
    pub pair_index: Vec<usize>,
}

impl AntennaLayout {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Keep only the antennas at `indices` (ascending, distinct).
    pub fn subset(&self, indices: &[usize]) -> AntennaLayout {
        AntennaLayout {
            positions: indices.iter().map(|&i| self.positions[i]).collect(),
            pair_index: indices.iter().map(|&i| self.pair_index[i]).collect(),
        }
    }

    fn check_distinct(&self) -> Result<()> {
        for i in 0..self.positions.len() {
            for j in (i + 1)..self.positions.len() {
                if self.positions[i].distance(&self.positions[j]) == 0.0 {
                    return Err(Error::config(
                        "antenna positions",
                        format!("antennas {i} and {j} coincide"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Receiver (ESL) positions with their rack and shelf ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceLayout {
    pub positions: Vec<Point3>,
    pub rack_id: Vec<usize>,
    pub shelf_id: Vec<usize>,
}

impl DeviceLayout {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Axis-aligned rectangle in the ceiling plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub width: f64,
    pub height: f64,
}

/// Aisle geometry knobs; defaults reproduce the evaluation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AisleGeometry {
    /// Ceiling (antenna) height [m].
    pub ceiling_height_m: f64,
    /// Aisle width between the rack faces [m].
    pub aisle_width_m: f64,
    /// Rack length along the aisle [m].
    pub rack_length_m: f64,
    /// Rack height [m].
    pub rack_height_m: f64,
    /// Shelf depth [m] (documentation of the physical rack; devices sit at
    /// the shelf front edge, i.e. on the rack face plane).
    pub shelf_depth_m: f64,
    /// Footprint over which antenna pair centers are spread.
    pub antenna_area: Rect,
}

impl Default for AisleGeometry {
    fn default() -> Self {
        Self {
            ceiling_height_m: 2.4,
            aisle_width_m: 4.0,
            rack_length_m: 8.4,
            rack_height_m: 2.1,
            shelf_depth_m: 0.5,
            antenna_area: DEFAULT_ANTENNA_AREA,
        }
    }
}

/// Footprint whose uniform 7x6 pair grid lands exactly on the surveyed
/// ceiling coordinates below.
pub const DEFAULT_ANTENNA_AREA: Rect = Rect {
    x0: -0.1,
    y0: 0.36,
    width: 8.4,
    height: 3.6,
};

/// Spacing between the two antennas of a pair [m].
pub const DEFAULT_PAIR_GAP_M: f64 = 0.3;

/// Surveyed ceiling grid: 14 antenna columns (7 pairs) by 6 rows.
pub const DEFAULT_ANTENNA_X: [f64; 14] = [
    0.35, 0.65, 1.55, 1.85, 2.75, 3.05, 3.95, 4.25, 5.15, 5.45, 6.35, 6.65, 7.55, 7.85,
];
pub const DEFAULT_ANTENNA_Y: [f64; 6] = [0.66, 1.26, 1.86, 2.46, 3.06, 3.66];

/// Default rack template: 2 racks x 5 shelves x 24 devices per shelf.
pub const DEFAULT_RACKS: usize = 2;
pub const DEFAULT_SHELVES: usize = 5;
pub const DEFAULT_DEVICES_PER_SHELF: usize = 24;

/// Build the default scenario with overrides applied.
///
/// The antenna layout is the surveyed 84-position ceiling grid; the device
/// layout enumerates rack-major, then shelf (bottom first), then position
/// along the aisle. Overriding `num_receivers` keeps the same template and
/// takes the first K positions of that enumeration; overriding
/// `num_antennas` is only meaningful for antenna-count sweeps and must not
/// exceed the 84 grid positions.
pub fn build_default_scenario(
    overrides: &ParameterOverrides,
) -> Result<(SystemParameters, AntennaLayout, DeviceLayout)> {
    let params = overrides.apply(&SystemParameters::default())?;
    let mut geometry = AisleGeometry::default();
    if let Some(z) = overrides.ceiling_height_m {
        if !(z > geometry.rack_height_m) {
            return Err(Error::config(
                "ceiling_height_m",
                format!(
                    "must exceed the {} m rack height, got {z}",
                    geometry.rack_height_m
                ),
            ));
        }
        geometry.ceiling_height_m = z;
    }

    let antennas = default_antenna_layout(&geometry);
    if params.num_antennas != antennas.len() {
        return Err(Error::config(
            "num_antennas",
            format!(
                "default ceiling grid has {} antennas; use antenna selection for subsets, got {}",
                antennas.len(),
                params.num_antennas
            ),
        ));
    }

    let full = generate_esl_positions(
        DEFAULT_RACKS,
        DEFAULT_SHELVES,
        DEFAULT_DEVICES_PER_SHELF,
        &geometry,
    )?;
    if params.num_receivers > full.len() {
        return Err(Error::config(
            "num_receivers",
            format!(
                "default rack template holds {} devices, got {}",
                full.len(),
                params.num_receivers
            ),
        ));
    }
    let devices = DeviceLayout {
        positions: full.positions[..params.num_receivers].to_vec(),
        rack_id: full.rack_id[..params.num_receivers].to_vec(),
        shelf_id: full.shelf_id[..params.num_receivers].to_vec(),
    };

    Ok((params, antennas, devices))
}

/// The surveyed default ceiling layout, built from the exact coordinate
/// constants (no arithmetic involved, so it is reproducible to the bit).
pub fn default_antenna_layout(geometry: &AisleGeometry) -> AntennaLayout {
    let mut positions = Vec::with_capacity(DEFAULT_ANTENNA_X.len() * DEFAULT_ANTENNA_Y.len());
    let mut pair_index = Vec::with_capacity(positions.capacity());
    for (row, &y) in DEFAULT_ANTENNA_Y.iter().enumerate() {
        for (col, &x) in DEFAULT_ANTENNA_X.iter().enumerate() {
            positions.push(Point3::new(x, y, geometry.ceiling_height_m));
            pair_index.push(row * (DEFAULT_ANTENNA_X.len() / 2) + col / 2);
        }
    }
    AntennaLayout {
        positions,
        pair_index,
    }
}

/// Generate a ceiling grid of antenna pairs.
///
/// `nx` is the number of antenna columns (must be even: columns come in
/// pairs `pair_gap_m` apart), `ny` the number of rows. Pair centers are
/// evenly spread over `area` with half-spacing margins:
/// center_i = x0 + (i + 1/2) * width / (nx/2), row_j = y0 + (j + 1/2) * height / ny.
///
/// With `(14, 6, 0.3)` over [`DEFAULT_ANTENNA_AREA`] this reproduces the
/// surveyed default layout.
pub fn generate_antenna_grid(
    nx: usize,
    ny: usize,
    pair_gap_m: f64,
    area: Rect,
    ceiling_height_m: f64,
) -> Result<AntennaLayout> {
    if nx == 0 || ny == 0 {
        return Err(Error::config("nx/ny", "grid must be non-empty"));
    }
    if nx % 2 != 0 {
        return Err(Error::config(
            "nx",
            format!("antennas come in pairs; nx must be even, got {nx}"),
        ));
    }
    if !(pair_gap_m > 0.0) {
        return Err(Error::config("pair_gap_m", "must be positive"));
    }
    if !(area.width > 0.0 && area.height > 0.0) {
        return Err(Error::config("area", "rectangle must have positive area"));
    }
    let npairs = nx / 2;
    let dx = area.width / npairs as f64;
    let dy = area.height / ny as f64;
    let mut positions = Vec::with_capacity(nx * ny);
    let mut pair_index = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = area.y0 + (j as f64 + 0.5) * dy;
        for p in 0..npairs {
            let center = area.x0 + (p as f64 + 0.5) * dx;
            for side in 0..2 {
                let x = center + (side as f64 - 0.5) * pair_gap_m;
                positions.push(Point3::new(x, y, ceiling_height_m));
                pair_index.push(j * npairs + p);
            }
        }
    }
    let layout = AntennaLayout {
        positions,
        pair_index,
    };
    layout.check_distinct()?;
    Ok(layout)
}

/// Generate ESL positions on the rack faces.
///
/// Shelf heights are `(s + 1) * rack_height / (shelves + 1)` (evenly spaced
/// with end margins equal to the spacing), devices are uniformly spaced
/// along the rack length with half-spacing margins, and the device antenna
/// sits at the shelf front edge: y = 0 for rack 0, y = aisle width for
/// rack 1 (further racks would stack in y, which the single-aisle template
/// does not model).
pub fn generate_esl_positions(
    racks: usize,
    shelves: usize,
    per_shelf: usize,
    geometry: &AisleGeometry,
) -> Result<DeviceLayout> {
    if racks == 0 || shelves == 0 || per_shelf == 0 {
        return Err(Error::config(
            "racks/shelves/per_shelf",
            "all counts must be at least 1",
        ));
    }
    if racks > 2 {
        return Err(Error::config(
            "racks",
            "the single-aisle template has two rack faces",
        ));
    }
    if !(geometry.rack_length_m > 0.0 && geometry.rack_height_m > 0.0) {
        return Err(Error::config(
            "geometry",
            "rack length and height must be positive",
        ));
    }
    let n = racks * shelves * per_shelf;
    let mut positions = Vec::with_capacity(n);
    let mut rack_id = Vec::with_capacity(n);
    let mut shelf_id = Vec::with_capacity(n);
    let dz = geometry.rack_height_m / (shelves as f64 + 1.0);
    let dx = geometry.rack_length_m / per_shelf as f64;
    for rack in 0..racks {
        let y = rack as f64 * geometry.aisle_width_m;
        for shelf in 0..shelves {
            let z = (shelf as f64 + 1.0) * dz;
            for slot in 0..per_shelf {
                let x = (slot as f64 + 0.5) * dx;
                positions.push(Point3::new(x, y, z));
                rack_id.push(rack);
                shelf_id.push(shelf);
            }
        }
    }
    // Coincidence is only possible through degenerate geometry (zero aisle
    // width with two racks).
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            if positions[i].distance(&positions[j]) == 0.0 {
                return Err(Error::config(
                    "geometry",
                    format!("devices {i} and {j} coincide"),
                ));
            }
        }
    }
    Ok(DeviceLayout {
        positions,
        rack_id,
        shelf_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn defaults_match_the_reference_scenario() {
        let (params, antennas, devices) = build_default_scenario(&Default::default()).unwrap();
        assert_eq!(antennas.len(), 84);
        assert_eq!(devices.len(), 240);
        assert_eq!(params.required_energy_j, 0.5);
        assert_eq!(params.carrier_frequency_hz, 0.917e9);
        assert_eq!(params.window_s, 43_200.0);
        assert_eq!(params.harvester_efficiency, 0.16);
        assert_eq!(params.harvester_threshold_w, 1.58e-5);
        assert_eq!(params.max_power_per_antenna_w, 4.0);
        // First antenna of the surveyed grid.
        assert_eq!(antennas.positions[0], Point3::new(0.35, 0.66, 2.4));
    }

    #[test]
    fn k_override_takes_the_first_shelf_position() {
        let overrides = ParameterOverrides {
            num_receivers: Some(1),
            ..Default::default()
        };
        let (_, _, devices) = build_default_scenario(&overrides).unwrap();
        assert_eq!(devices.len(), 1);
        let p = devices.positions[0];
        // First device: rack 0, bottom shelf, first slot along the aisle.
        assert_relative_eq!(p.x, 0.175, max_relative = 1e-12);
        assert_eq!(p.y, 0.0);
        assert_relative_eq!(p.z, 0.35, max_relative = 1e-12);
        assert_eq!(devices.rack_id[0], 0);
        assert_eq!(devices.shelf_id[0], 0);
    }

    #[test]
    fn invalid_overrides_name_the_field() {
        let overrides = ParameterOverrides {
            required_energy_j: Some(-1.0),
            ..Default::default()
        };
        match build_default_scenario(&overrides) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "required_energy_j"),
            other => panic!("expected config error, got {other:?}"),
        }
        let overrides = ParameterOverrides {
            window_s: Some(1000.0),
            slot_duration_s: Some(1.0),
            num_slots: Some(84),
            ..Default::default()
        };
        assert!(build_default_scenario(&overrides).is_err());
    }

    #[test]
    fn grid_generator_reproduces_the_surveyed_layout() {
        let grid = generate_antenna_grid(14, 6, DEFAULT_PAIR_GAP_M, DEFAULT_ANTENNA_AREA, 2.4)
            .unwrap();
        let reference = default_antenna_layout(&AisleGeometry::default());
        assert_eq!(grid.len(), 84);
        for (a, b) in grid.positions.iter().zip(reference.positions.iter()) {
            assert_relative_eq!(a.x, b.x, epsilon = 1e-12);
            assert_relative_eq!(a.y, b.y, epsilon = 1e-12);
            assert_eq!(a.z, b.z);
        }
        assert_eq!(grid.pair_index, reference.pair_index);
    }

    #[test]
    fn single_pair_grid() {
        let area = Rect {
            x0: 0.0,
            y0: 0.0,
            width: 1.0,
            height: 1.0,
        };
        let grid = generate_antenna_grid(2, 1, 0.3, area, 2.4).unwrap();
        assert_eq!(grid.len(), 2);
        let d = grid.positions[0].distance(&grid.positions[1]);
        assert_relative_eq!(d, 0.3, max_relative = 1e-12);
    }

    #[test]
    fn grid_min_pairwise_distance_is_the_pair_gap() {
        // Exhaustive pairwise check over the generated grid.
        let grid = generate_antenna_grid(14, 6, DEFAULT_PAIR_GAP_M, DEFAULT_ANTENNA_AREA, 2.4)
            .unwrap();
        let mut min = f64::INFINITY;
        for i in 0..grid.len() {
            for j in (i + 1)..grid.len() {
                min = min.min(grid.positions[i].distance(&grid.positions[j]));
            }
        }
        assert_relative_eq!(min, 0.3, max_relative = 1e-9);
    }

    #[test]
    fn zero_area_rectangle_is_rejected() {
        let area = Rect {
            x0: 0.0,
            y0: 0.0,
            width: 0.0,
            height: 1.0,
        };
        assert!(generate_antenna_grid(2, 1, 0.3, area, 2.4).is_err());
    }

    #[test]
    fn esl_positions_default_template() {
        let layout =
            generate_esl_positions(2, 5, 24, &AisleGeometry::default()).unwrap();
        assert_eq!(layout.len(), 240);
        // Shelf levels on the 2.1 m rack.
        let expected_z = [0.35, 0.70, 1.05, 1.40, 1.75];
        for (shelf, &z) in expected_z.iter().enumerate() {
            let got = layout
                .positions
                .iter()
                .zip(layout.shelf_id.iter())
                .find(|(_, &s)| s == shelf)
                .unwrap()
                .0
                .z;
            assert_relative_eq!(got, z, max_relative = 1e-12);
        }
        // Devices on a shelf are uniformly spaced along the rack.
        let xs: Vec<f64> = layout.positions[..24].iter().map(|p| p.x).collect();
        for w in xs.windows(2) {
            assert_relative_eq!(w[1] - w[0], 8.4 / 24.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn single_device_sits_at_shelf_center_height() {
        let layout = generate_esl_positions(1, 1, 1, &AisleGeometry::default()).unwrap();
        assert_eq!(layout.len(), 1);
        let p = layout.positions[0];
        assert_relative_eq!(p.x, 4.2, max_relative = 1e-12);
        assert_eq!(p.y, 0.0);
        assert_relative_eq!(p.z, 2.1 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn every_device_antenna_distance_is_positive() {
        let (_, antennas, devices) = build_default_scenario(&Default::default()).unwrap();
        let mut min = f64::INFINITY;
        for d in &devices.positions {
            for a in &antennas.positions {
                min = min.min(d.distance(a));
            }
        }
        assert!(min > 0.0);
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let a = build_default_scenario(&Default::default()).unwrap();
        let b = build_default_scenario(&Default::default()).unwrap();
        assert_eq!(a.1, b.1);
        assert_eq!(a.2, b.2);
        let ga = generate_antenna_grid(14, 6, 0.3, DEFAULT_ANTENNA_AREA, 2.4).unwrap();
        let gb = generate_antenna_grid(14, 6, 0.3, DEFAULT_ANTENNA_AREA, 2.4).unwrap();
        assert_eq!(ga, gb);
    }

    #[test]
    fn parameter_round_trip_is_byte_identical() {
        let params = SystemParameters::default();
        let one = serde_json::to_string_pretty(&params).unwrap();
        let parsed: SystemParameters = serde_json::from_str(&one).unwrap();
        let two = serde_json::to_string_pretty(&parsed).unwrap();
        assert_eq!(one, two);
    }
}
