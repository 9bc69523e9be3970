//! Sector data for the Belgian-like fixture.
//!
//! Columns: target inventory days `n`, pre-shock gross output `x0`,
//! household consumption `c0`, exogenous demand `f0` and labor compensation
//! `l0` (million EUR per year), lockdown labor supply shocks for the first and
//! second lockdown, lockdown household and exogenous demand shocks (positive
//! fractions), and whether consumption happens on site.
//!
//! Q87-88 lists `c0 + f0` one unit above `x0`; its `x0` is raised to 15210
//! so the accounting identity holds.

pub(crate) const N_DAYS: usize = 0;
pub(crate) const X0: usize = 1;
pub(crate) const C0: usize = 2;
pub(crate) const F0: usize = 3;
pub(crate) const L0: usize = 4;
pub(crate) const EPS_S_L1: usize = 5;
pub(crate) const EPS_S_L2: usize = 6;
pub(crate) const EPS_D: usize = 7;
pub(crate) const EPS_F: usize = 8;

pub(crate) type SectorRow = (&'static str, [f64; 9], bool);

pub(crate) const SECTORS: [SectorRow; 63] = [
    (
        "A01",
        [
            32.2, 16782.0, 2489.0, 3363.0, 491.0, 0.065, 0.05, 0.1, 0.138,
        ],
        false,
    ),
    (
        "A02",
        [39.2, 648.0, 93.0, 163.0, 23.0, 0.065, 0.05, 0.1, 0.119],
        false,
    ),
    (
        "A03",
        [73.4, 429.0, 206.0, 77.0, 28.0, 0.065, 0.05, 0.1, 0.148],
        false,
    ),
    (
        "B05-09",
        [16.8, 24251.0, 25.0, 9447.0, 266.0, 0.065, 0.05, 0.1, 0.153],
        false,
    ),
    (
        "C10-12",
        [
            38.5, 56386.0, 14792.0, 23096.0, 4324.0, 0.085, 0.03, 0.1, 0.15,
        ],
        false,
    ),
    (
        "C13-15",
        [50.6, 12802.0, 3979.0, 6544.0, 880.0, 0.61, 0.08, 0.1, 0.134],
        false,
    ),
    (
        "C16",
        [32.2, 4890.0, 228.0, 1672.0, 487.0, 0.3, 0.05, 0.1, 0.112],
        false,
    ),
    (
        "C17",
        [28.8, 7857.0, 377.0, 3138.0, 642.0, 0.3, 0.05, 0.1, 0.141],
        false,
    ),
    (
        "C18",
        [16.8, 3193.0, 63.0, 640.0, 674.0, 0.281, 0.04, 0.1, 0.094],
        false,
    ),
    (
        "C19",
        [
            21.5, 32573.0, 3435.0, 15024.0, 233.0, 0.14, 0.01, 0.1, 0.148,
        ],
        false,
    ),
    (
        "C20",
        [
            39.9, 62834.0, 1310.0, 39364.0, 3669.0, 0.14, 0.01, 0.1, 0.147,
        ],
        false,
    ),
    (
        "C21",
        [
            47.6, 21378.0, 1304.0, 14566.0, 1548.0, 0.14, 0.01, 0.1, 0.149,
        ],
        false,
    ),
    (
        "C22",
        [32.8, 14087.0, 559.0, 7425.0, 1410.0, 0.19, 0.02, 0.1, 0.14],
        false,
    ),
    (
        "C23",
        [36.5, 8864.0, 351.0, 3015.0, 1491.0, 0.19, 0.02, 0.1, 0.13],
        false,
    ),
    (
        "C24",
        [49.6, 29681.0, 49.0, 17145.0, 1975.0, 0.15, 0.06, 0.1, 0.15],
        false,
    ),
    (
        "C25",
        [38.5, 14444.0, 246.0, 7317.0, 2274.0, 0.15, 0.06, 0.1, 0.144],
        false,
    ),
    (
        "C26",
        [
            52.0, 15089.0, 803.0, 11006.0, 672.0, 0.135, 0.03, 0.1, 0.149,
        ],
        false,
    ),
    (
        "C27",
        [
            46.3, 10145.0, 1134.0, 6066.0, 1007.0, 0.255, 0.08, 0.1, 0.149,
        ],
        false,
    ),
    (
        "C28",
        [
            44.2, 23306.0, 223.0, 18380.0, 1812.0, 0.255, 0.08, 0.1, 0.15,
        ],
        false,
    ),
    (
        "C29",
        [
            24.5, 42488.0, 3705.0, 31168.0, 1602.0, 0.57, 0.0, 0.1, 0.148,
        ],
        false,
    ),
    (
        "C30",
        [64.4, 4474.0, 474.0, 3014.0, 425.0, 0.57, 0.0, 0.1, 0.151],
        false,
    ),
    (
        "C31-32",
        [
            39.2, 17193.0, 2909.0, 12780.0, 721.0, 0.675, 0.06, 0.1, 0.147,
        ],
        false,
    ),
    (
        "C33",
        [37.5, 8468.0, 214.0, 1920.0, 2325.0, 0.281, 0.04, 0.1, 0.118],
        false,
    ),
    (
        "D35",
        [13.1, 19084.0, 5719.0, 4627.0, 2008.0, 0.0, 0.0, 0.0, 0.148],
        false,
    ),
    (
        "E36",
        [5.7, 1233.0, 762.0, 0.0, 433.0, 0.0, 0.0, 0.0, 0.148],
        false,
    ),
    (
        "E37-39",
        [11.7, 14748.0, 1255.0, 3681.0, 1581.0, 0.0, 0.0, 0.0, 0.076],
        false,
    ),
    (
        "F41-43",
        [
            64.4, 68328.0, 609.0, 37917.0, 9383.0, 0.435, 0.04, 0.1, 0.152,
        ],
        false,
    ),
    (
        "G45",
        [
            43.6, 11646.0, 4234.0, 4285.0, 3127.0, 0.427, 0.187, 0.8, 0.15,
        ],
        true,
    ),
    (
        "G46",
        [
            18.4, 56373.0, 6329.0, 25408.0, 14907.0, 0.427, 0.187, 0.1, 0.15,
        ],
        false,
    ),
    (
        "G47",
        [
            31.8, 23611.0, 22494.0, 1117.0, 8209.0, 0.427, 0.187, 0.1, 0.141,
        ],
        true,
    ),
    (
        "H49",
        [
            1.7, 27054.0, 2217.0, 8686.0, 5460.0, 0.615, 0.06, 0.67, 0.149,
        ],
        true,
    ),
    (
        "H50",
        [2.0, 5171.0, 10.0, 3027.0, 208.0, 0.615, 0.06, 0.67, 0.15],
        true,
    ),
    (
        "H51",
        [1.7, 7891.0, 572.0, 2638.0, 477.0, 0.45, 0.01, 0.67, 0.15],
        true,
    ),
    (
        "H52",
        [25.8, 31465.0, 263.0, 13833.0, 5370.0, 0.14, 0.02, 0.0, 0.15],
        true,
    ),
    (
        "H53",
        [1.3, 4405.0, 191.0, 715.0, 1487.0, 0.615, 0.06, 0.0, 0.148],
        true,
    ),
    (
        "I55-56",
        [7.4, 19527.0, 11300.0, 1693.0, 4036.0, 0.925, 0.7, 0.8, 0.8],
        true,
    ),
    (
        "J58",
        [7.0, 6022.0, 1151.0, 1714.0, 802.0, 0.16, 0.03, 0.0, 0.147],
        false,
    ),
    (
        "J59-60",
        [11.4, 5167.0, 868.0, 1500.0, 755.0, 0.16, 0.03, 0.0, 0.099],
        false,
    ),
    (
        "J61",
        [6.0, 14003.0, 4335.0, 3237.0, 1797.0, 0.16, 0.03, 0.0, 0.15],
        false,
    ),
    (
        "J62-63",
        [6.4, 21334.0, 0.0, 9662.0, 5509.0, 0.16, 0.03, 0.0, 0.136],
        false,
    ),
    (
        "K64",
        [
            9.4, 20798.0, 3302.0, 2537.0, 3898.0, 0.025, 0.01, 0.0, 0.149,
        ],
        false,
    ),
    (
        "K65",
        [9.7, 9448.0, 4150.0, 944.0, 2021.0, 0.025, 0.01, 0.0, 0.149],
        false,
    ),
    (
        "K66",
        [9.4, 20464.0, 2691.0, 6250.0, 3569.0, 0.025, 0.01, 0.0, 0.15],
        false,
    ),
    (
        "L68",
        [34.2, 46378.0, 33438.0, 214.0, 1166.0, 0.0, 0.0, 0.0, 0.15],
        true,
    ),
    (
        "M69-70",
        [
            21.8, 20233.0, 546.0, 19687.0, 6691.0, 0.17, 0.045, 0.0, 0.144,
        ],
        true,
    ),
    (
        "M71",
        [14.7, 13253.0, 94.0, 5477.0, 2433.0, 0.17, 0.045, 0.0, 0.151],
        false,
    ),
    (
        "M72",
        [8.4, 20054.0, 0.0, 18169.0, 4925.0, 0.17, 0.045, 0.0, 0.149],
        false,
    ),
    (
        "M73",
        [3.4, 9887.0, 3.0, 3821.0, 798.0, 0.17, 0.045, 0.0, 0.14],
        false,
    ),
    (
        "M74-75",
        [8.4, 2779.0, 397.0, 322.0, 241.0, 0.17, 0.045, 0.0, 0.146],
        false,
    ),
    (
        "N77",
        [3.4, 17691.0, 2292.0, 4093.0, 1214.0, 0.357, 0.043, 0.8, 0.8],
        true,
    ),
    (
        "N78",
        [3.4, 7661.0, 0.0, 50.0, 6943.0, 0.155, 0.05, 0.0, 0.141],
        false,
    ),
    (
        "N79",
        [3.4, 3225.0, 2770.0, 17.0, 365.0, 0.685, 0.45, 0.8, 0.8],
        true,
    ),
    (
        "N80-82",
        [
            3.4, 13999.0, 1714.0, 2375.0, 5543.0, 0.24, 0.065, 0.0, 0.141,
        ],
        false,
    ),
    (
        "O84",
        [9.4, 33807.0, 2729.0, 30292.0, 23682.0, 0.0, 0.0, 0.0, 0.007],
        true,
    ),
    (
        "P85",
        [4.0, 27168.0, 1212.0, 24225.0, 21167.0, 0.0, 0.0, 0.0, 0.018],
        true,
    ),
    (
        "Q86",
        [3.0, 32665.0, 6366.0, 22548.0, 10263.0, 0.4, 0.0, 0.0, 0.002],
        true,
    ),
    (
        "Q87-88",
        [3.0, 15210.0, 6653.0, 8557.0, 11628.0, 0.4, 0.0, 0.0, 0.002],
        true,
    ),
    (
        "R90-92",
        [2.3, 4914.0, 1983.0, 1886.0, 1279.0, 0.74, 0.57, 0.8, 0.8],
        true,
    ),
    (
        "R93",
        [2.3, 2869.0, 961.0, 786.0, 622.0, 0.74, 0.57, 0.8, 0.8],
        true,
    ),
    (
        "S94",
        [2.3, 6231.0, 115.0, 3090.0, 2437.0, 0.74, 0.57, 0.1, 0.8],
        true,
    ),
    (
        "S95",
        [2.3, 1057.0, 582.0, 28.0, 106.0, 0.281, 0.04, 0.1, 0.085],
        true,
    ),
    (
        "S96",
        [2.3, 3640.0, 3241.0, 7.0, 620.0, 0.74, 0.57, 0.8, 0.8],
        true,
    ),
    (
        "T97-98",
        [9.4, 425.0, 425.0, 0.0, 425.0, 0.97, 0.85, 0.0, 0.148],
        true,
    ),
];
