//! Values transcribed verbatim from the reference running-example tables.

#![allow(clippy::approx_constant)]

/// Reverse-mapped attributes, one row per record.
pub const Z: [[&str; 3]; 20] = [
    ["108.21", "980.97", "4893.50"],
    ["96.18", "988.44", "4986.25"],
    ["107.62", "902.21", "4905.71"],
    ["93.13", "953.37", "4941.81"],
    ["95.50", "1052.34", "5232.96"],
    ["99.72", "984.87", "5212.25"],
    ["98.99", "971.09", "4835.05"],
    ["116.75", "1057.63", "5437.43"],
    ["103.69", "941.48", "4824.95"],
    ["105.59", "952.13", "4954.28"],
    ["87.62", "990.58", "5158.64"],
    ["109.81", "1086.34", "4950.48"],
    ["110.63", "981.80", "4900.79"],
    ["95.24", "1025.13", "4928.80"],
    ["109.96", "986.70", "5084.18"],
    ["100.87", "1031.74", "4495.19"],
    ["115.53", "972.20", "5143.05"],
    ["93.16", "1027.64", "5108.54"],
    ["113.76", "1005.19", "4714.76"],
    ["104.74", "1023.96", "4931.16"],
];

/// Residual noise `E'` then direct noise `E`, per record.
pub const NOISE: [([f64; 3], [f64; 3]); 20] = [
    ([-0.03, -8.35, -16.77], [4.49, -9.18, -52.07]),
    ([0.42, 32.29, 18.79], [3.47, 39.76, 73.88]),
    ([-2.36, -19.29, -5.03], [4.39, -19.29, -207.86]),
    ([-5.11, -8.83, 7.97], [-7.22, -8.83, -134.40]),
    ([-3.93, 5.49, 34.61], [-4.61, -28.51, 55.32]),
    ([0.69, 6.47, 18.39], [7.25, 4.64, -2.32]),
    ([1.32, -11.20, -11.02], [4.81, 7.76, -0.92]),
    ([6.62, 3.60, 13.27], [7.84, 72.79, 13.27]),
    ([-0.57, -38.23, -72.92], [4.13, -38.23, -83.02]),
    ([-0.77, -39.36, 43.33], [-5.14, -72.10, 47.13]),
    ([0.21, 34.43, 7.99], [-11.89, 19.82, 7.99]),
    ([2.40, -3.91, 37.96], [-4.54, 24.80, 2.19]),
    ([3.66, 7.13, -11.04], [6.67, -36.20, -64.53]),
    ([-4.41, 24.45, -26.76], [3.21, 17.84, -3.67]),
    ([3.68, 15.49, -63.47], [3.83, 31.10, 78.90]),
    ([2.20, 20.29, 24.07], [-7.56, -0.31, 24.07]),
    ([1.47, -9.36, -55.15], [3.24, -9.36, 194.40]),
    ([-3.73, 22.33, -35.75], [-16.16, 22.33, -70.26]),
    ([2.03, 30.91, -52.03], [7.58, 45.52, -52.03]),
    ([-0.74, 13.04, 0.83], [-0.74, 13.04, 31.20]),
];

pub const SPEARMAN: [f64; 3] = [0.722, 0.844, 0.776];

pub const RECORD3_DISTANCE: usize = 4;
pub const RECORD3_MATCH: usize = 10;
pub const RECORD3_CLOSEST_RANKS: [usize; 3] = [8, 2, 16];
pub const RECORD3_VARIANCES: [f64; 3] = [24.70, 896.76, 20167.78];

pub const DATASET_D: usize = 1;
pub const DATASET_V: [f64; 3] = [0.01, 11.07, 30.26];
pub const RECORD_DISTANCES: [usize; 20] = [4, 4, 4, 4, 2, 3, 1, 4, 1, 4, 1, 4, 3, 3, 4, 4, 1, 3, 2, 2];

/// Per record and attribute: variance within `d`, then within `d_i`.
pub const RECORD_VARIANCES: [[(f64, f64); 3]; 20] = [
    [(0.48, 12.45), (69.14, 682.15), (388.07, 2170.53)],
    [(6.57, 31.12), (69.14, 682.15), (388.07, 2170.53)],
    [(1.63, 24.70), (155.00, 896.76), (1692.52, 20167.78)],
    [(12.83, 32.47), (64.36, 1332.66), (1692.52, 20167.78)],
    [(12.83, 16.94), (112.36, 118.46), (1738.89, 14751.48)],
    [(6.57, 22.88), (69.14, 414.40), (1738.99, 16208.14)],
    [(12.83, 12.83), (385.03, 385.03), (2612.38, 2612.38)],
    [(1.23, 18.76), (69.14, 682.15), (8384.15, 2257.38)],
    [(3.14, 3.14), (385.03, 385.03), (2612.38, 3407.82)],
    [(8.12, 21.96), (69.14, 682.15), (555.30, 2952.80)],
    [(3.14, 3.14), (147.25, 147.25), (3407.82, 1676.76)],
    [(11.06, 13.03), (14.43, 169.01), (429.60, 1313.97)],
    [(8.12, 16.70), (41.95, 359.80), (555.30, 2257.38)],
    [(0.01, 1.47), (29.73, 248.09), (208.80, 15949.39)],
    [(8.12, 21.96), (115.82, 937.01), (555.30, 95.84)],
    [(5.34, 22.74), (11.07, 190.00), (5145.91, 18406.42)],
    [(0.75, 0.75), (115.82, 115.82), (95.84, 95.84)],
    [(2.22, 14.82), (41.95, 359.80), (3407.82, 18406.42)],
    [(8.12, 12.76), (33.26, 252.94), (4352.91, 15949.39)],
    [(0.27, 2.94), (41.95, 160.52), (30.26, 334.85)],
];

/// Intruder linkage: 1-based permuted record numbers and distance, per original record.
pub const LINKAGE: [(&[usize], usize); 20] = [
    (&[1, 7], 4),
    (&[4], 3),
    (&[10], 3),
    (&[4], 4),
    (&[5], 2),
    (&[11], 2),
    (&[7], 2),
    (&[17], 5),
    (&[7, 9], 3),
    (&[15], 3),
    (&[2, 6], 4),
    (&[12], 5),
    (&[20], 3),
    (&[14], 3),
    (&[10], 3),
    (&[19], 5),
    (&[13], 2),
    (&[12], 5),
    (&[13, 19], 4),
    (&[20], 3),
];

pub const UNMATCHED: [usize; 4] = [3, 8, 16, 18];

/// Distance, frequency for the original records, frequency for the 8000 random records.
pub const DISTRIBUTIONS: [(usize, f64, f64); 11] = [
    (0, 0.0000, 0.0025),
    (1, 0.0000, 0.0586),
    (2, 0.2000, 0.1899),
    (3, 0.4000, 0.3014),
    (4, 0.2000, 0.2595),
    (5, 0.2000, 0.1288),
    (6, 0.0000, 0.0428),
    (7, 0.0000, 0.0143),
    (8, 0.0000, 0.0024),
    (9, 0.0000, 0.0000),
    (10, 0.0000, 0.0000),
];
