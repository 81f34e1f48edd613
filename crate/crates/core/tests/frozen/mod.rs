//! Reference values from an independent dense diagonalization (numpy, in
//! the same Dicke-by-photon product basis with its own matrix assembly)
//! and an independent GME computation (state evolved by full
//! diagonalization, SDP solved with cvxpy/Clarabel).
#![allow(dead_code)]

/// N = 3, Δ = 0.7, g = 0.25, photon cutoff 200, levels in [−1, 3].
pub const N3_PLUS: [f64; 7] = [-0.3310585193602589, 0.34107551580953677, 1.1194704845624337, 1.2948513449156023, 1.851195593385438, 2.5434839150528723, 2.922262435839451];
pub const N3_MINUS: [f64; 8] = [-0.8812350857930282, 0.027536929982612503, 0.3798166958660953, 0.9079763793999772, 1.4846595515937588, 2.0146455000610346, 2.417863122549798, 2.8095020910895743];

/// N = 1, Δ = 0.7, g = 0.25 (quantum Rabi model), levels in [−2, 2].
pub const RABI_PLUS: [f64; 3] = [-0.38732689668695147, 1.113862310890279, 1.8076364834012675];
pub const RABI_MINUS: [f64; 2] = [0.19265679419716278, 0.7314523298505262];

/// N = 2, Δ = 1, g = 0.2, levels in [−2, 2].
pub const N2_PLUS: [f64; 4] = [-1.0425557826007243, 0.45110449266127284, 0.9563667682456436, 1.4263607043116777];
pub const N2_MINUS: [f64; 4] = [-0.3480833620659584, 0.2234491817446478, 1.3143548314420541, 1.952111391300751];

/// N = 5, Δ = 0.7, g = 0.3, levels in [−3, 1.5].
pub const N5_PLUS: [f64; 9] = [-2.6274985896157497, -1.9114473874416291, -1.3530477109832835, -0.7159133385999972, -0.442400116893597, 0.3025758355879884, 0.4847781274554321, 0.9151966214276662, 1.0739008801292624];
pub const N5_MINUS: [f64; 9] = [-2.6152856792313197, -1.723622160323283, -1.0047995003511656, -0.7622190282177624, -0.13652384836503592, 0.1372769676867858, 0.5356291841684746, 1.0207950517579574, 1.447000651889973];

/// N = 12, Δ = 0.7, g = 0.15, photon cutoff 400, lowest 20 per parity.
pub const N12_PLUS: [f64; 20] = [-4.68780619766267, -4.274969234836402, -3.6719728589269574, -3.3024065742492463, -2.8883600985172544, -2.5226594989395235, -2.1511925005123915, -1.9811028167020837, -1.6315020952778605, -1.4361691634715232, -1.254501517273499, -0.8063777959466467, -0.667443060953017, -0.42359560264729024, -0.17192661132194204, 0.0769725058106206, 0.2800852185161399, 0.4934442367138405, 0.6292388427612602, 0.9248489463669048];
pub const N12_MINUS: [f64; 20] = [-4.6619382118919885, -4.025558694274355, -3.3985802181626212, -3.218657845468387, -2.906736758720749, -2.5020578474278046, -2.0712310558326315, -1.943141842375746, -1.6763509600841848, -1.2485056735417221, -0.9404905483643997, -0.7865093268461661, -0.6890263000193884, -0.35065818767597995, -0.2007947589669868, 0.05022211977448463, 0.3859940176019194, 0.5606376051290536, 0.659130003674097, 0.8510632672744647];

/// (N, g, t, GME) along the evolution of (|N/2⟩ + |−N/2⟩)|0⟩/√2 at Δ = ω = 1.
pub const GME_SAMPLES: [(u32, f64, f64, f64); 6] = [
    (2, 0.3, 1.0, 0.3174124763282401),
    (2, 0.3, 2.5, 0.28772198417398404),
    (2, 0.3, 7.0, 0.3266770611463308),
    (3, 0.1, 2.0, 0.4062891222463545),
    (3, 0.1, 5.0, 0.1300759490159422),
    (4, 0.05, 3.0, 0.4148235107623559),
];
