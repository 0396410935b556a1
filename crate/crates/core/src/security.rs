//! The security-bound pipeline: twirling to Bell-diagonal form, the lambda
//! spectrum, Eve's information I_E(Q, C), the secret key rate, and the
//! six-state reference curve.
//!
//! The attack model is collective: each pair is in the same two-qubit state
//! of which the eavesdropper holds a purification, and the only statistics
//! the parties monitor are Q and C. Two symmetrization steps reduce the
//! state to Bell-diagonal form without changing either quantity, and the
//! remaining free parameter of the Bell spectrum is chosen to maximize
//! Eve's information.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{bell_vector, pauli, tensor_product, DensityMatrix, Pauli};

/// Largest Q for which the closed form at u_max is known to be the maximum
/// (dI_E/du > 0 on the whole feasible interval).
pub const CLOSED_FORM_QBER_LIMIT: f64 = 0.159;

/// Binary entropy h(x) = -x log2 x - (1-x) log2 (1-x) in bits, with
/// h(0) = h(1) = 0 by continuity. Arguments within 1e-15 of the boundary
/// return exactly 0 to keep log() off the singularity.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            name: "x",
            value: x,
            min: 0.0,
            max: 1.0,
        });
    }
    if !(1e-15..=1.0 - 1e-15).contains(&x) {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// Applies both symmetrization steps:
/// rho_tilde = (rho + Z_AZ_B rho Z_AZ_B)/2, then the mixing that cancels
/// the real parts of the surviving Bell-basis coherences, leaving a state
/// that is Bell-diagonal in a chi-rotated Bell basis. Q and C are preserved
/// exactly; the map is idempotent.
pub fn twirl(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dims() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.matrix().dim(),
        });
    }
    let zz = tensor_product(&pauli(Pauli::Z), &pauli(Pauli::Z));
    let tilde = rho
        .matrix()
        .add(&rho.matrix().conjugate_by(&zz))
        .scale_re(0.5);
    // Averaging rho_tilde(a, b) with rho_tilde(-a*, -b*) amounts to
    // conjugating the entrywise complex conjugate by X_AX_B: the Bell
    // vectors are real, so conjugation commutes with the Bell-basis change,
    // and X_AX_B fixes Phi+/Psi+ while negating Phi-/Psi-.
    let xx = tensor_product(&pauli(Pauli::X), &pauli(Pauli::X));
    let mirrored = tilde.conj().conjugate_by(&xx);
    let m = tilde.add(&mirrored).scale_re(0.5);
    DensityMatrix::new((2, 2), m)
}

/// The Bell-diagonal spectrum lambda_1..lambda_4 of the twirled state, plus
/// the basis rotation angles chi (Phi block) and chi' (Psi block).
///
/// The lambdas determine both monitored quantities:
/// C = 2[(l1 - l2)^2 + (l3 - l4)^2] and Q = l3 + l4.
#[derive(Debug, Clone, PartialEq)]
pub struct BellDiagonalSpectrum {
    pub lambdas: [f64; 4],
    /// Rotation of the {|00>, |11>} Bell pair; informational only.
    pub chi: f64,
    /// Rotation of the {|01>, |10>} Bell pair; informational only.
    pub chi_prime: f64,
}

impl BellDiagonalSpectrum {
    pub fn correlation_sum(&self) -> f64 {
        let [l1, l2, l3, l4] = self.lambdas;
        2.0 * ((l1 - l2).powi(2) + (l3 - l4).powi(2))
    }

    pub fn qber(&self) -> f64 {
        self.lambdas[2] + self.lambdas[3]
    }
}

/// Extracts the spectrum from any two-qubit state (twirl applied
/// internally): reads mu_1..mu_4 and the block coherences a, b from the
/// twirled state's Bell-basis matrix, then
/// lambda_{1,2} = (mu_1 + mu_2 ± A')/2 with A' = sqrt((mu_1-mu_2)^2 + A^2),
/// A = Im(a), and likewise for lambda_{3,4} with B = Im(b).
pub fn bell_spectrum(rho: &DensityMatrix) -> Result<BellDiagonalSpectrum> {
    let twirled = twirl(rho)?;
    let m = twirled.matrix();

    let sandwich = |bra: &[Complex64], ket: &[Complex64]| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                acc += bra[i].conj() * m.get(i, j) * ket[j];
            }
        }
        acc
    };

    let phi_p = bell_vector(1).expect("index in range");
    let phi_m = bell_vector(2).expect("index in range");
    let psi_p = bell_vector(3).expect("index in range");
    let psi_m = bell_vector(4).expect("index in range");

    let mu1 = sandwich(&phi_p, &phi_p).re;
    let mu2 = sandwich(&phi_m, &phi_m).re;
    let mu3 = sandwich(&psi_p, &psi_p).re;
    let mu4 = sandwich(&psi_m, &psi_m).re;
    // Coherences a/2 = <Phi-|rho|Phi+> and b/2 = <Psi-|rho|Psi+>; after the
    // twirl only their imaginary parts survive.
    let a = sandwich(&phi_m, &phi_p) * 2.0;
    let b = sandwich(&psi_m, &psi_p) * 2.0;
    let big_a = a.im;
    let big_b = b.im;

    let a_prime = ((mu1 - mu2).powi(2) + big_a * big_a).sqrt();
    let b_prime = ((mu3 - mu4).powi(2) + big_b * big_b).sqrt();
    let clamp = |x: f64| {
        debug_assert!(x > -1e-10, "negative lambda {x}");
        x.max(0.0)
    };
    let lambdas = [
        clamp(0.5 * (mu1 + mu2 + a_prime)),
        clamp(0.5 * (mu1 + mu2 - a_prime)),
        clamp(0.5 * (mu3 + mu4 + b_prime)),
        clamp(0.5 * (mu3 + mu4 - b_prime)),
    ];

    // chi and chi' come from the eigenvector phases of each 2x2 Bell block;
    // the printed closed form for cos^2(chi) is not used (its right-hand
    // side can exceed 1, and C is fully determined by the lambdas anyway).
    let chi = block_rotation_angle(mu1, mu2, a * 0.5);
    let chi_prime = block_rotation_angle(mu3, mu4, b * 0.5);

    Ok(BellDiagonalSpectrum {
        lambdas,
        chi,
        chi_prime,
    })
}

/// Top-eigenvector phase of the Hermitian block [[mu_p, conj(c)], [c, mu_m]]
/// written in a (plus, minus) Bell pair: alpha|+> + gamma|-> has the form
/// (e^{i chi}|xy> + e^{-i chi}|x'y'>)/sqrt(2) up to a global phase, with
/// chi = (arg(alpha + gamma) - arg(alpha - gamma))/2.
fn block_rotation_angle(mu_p: f64, mu_m: f64, c: Complex64) -> f64 {
    let disc = (0.25 * (mu_p - mu_m).powi(2) + c.norm_sqr()).sqrt();
    let top = 0.5 * (mu_p + mu_m) + disc;
    let mut alpha = c.conj();
    let mut gamma = Complex64::new(top - mu_p, 0.0);
    let norm = (alpha.norm_sqr() + gamma.norm_sqr()).sqrt();
    if norm < 1e-14 {
        // Degenerate diagonal block: any rotation works.
        return 0.0;
    }
    alpha /= norm;
    gamma /= norm;
    0.5 * ((alpha + gamma).arg() - (alpha - gamma).arg())
}

/// How the optimizer arrived at Eve's information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptMethod {
    /// Evaluated at u_max; valid for Q <= 15.9%.
    ClosedForm,
    /// Bounded one-dimensional maximization over u.
    Numeric,
}

impl fmt::Display for OptMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptMethod::ClosedForm => write!(f, "closed-form"),
            OptMethod::Numeric => write!(f, "numeric"),
        }
    }
}

/// The output of the security bound at one (Q, C) point.
#[derive(Debug, Clone)]
pub struct SecurityEstimate {
    pub q: f64,
    pub c: f64,
    /// Eve's information in bits per signal; NaN when infeasible.
    pub eve_info: f64,
    /// Secret key rate r = 1 - h(Q) - I_E; NaN when infeasible.
    pub key_rate: f64,
    pub u_opt: f64,
    pub v_opt: f64,
    pub feasible: bool,
    pub method: OptMethod,
}

impl SecurityEstimate {
    /// Marker row for a (Q, C) pair outside the constraint region.
    pub fn infeasible(q: f64, c: f64) -> Self {
        Self {
            q,
            c,
            eve_info: f64::NAN,
            key_rate: f64::NAN,
            u_opt: f64::NAN,
            v_opt: f64::NAN,
            feasible: false,
            method: OptMethod::Numeric,
        }
    }
}

/// Eve's information bounded by the measured (Q, C), maximized over the
/// free Bell-spectrum parameter, and the resulting key rate.
///
/// The spectrum is parametrized as l1 = (1-Q)(1+u)/2, l2 = (1-Q)(1-u)/2,
/// l3 = Q(1+v)/2, l4 = Q(1-v)/2 with u, v in [0, 1], constrained by
/// C = 2[(1-Q)^2 u^2 + Q^2 v^2], and
/// I_E(Q, u, v) = (1-Q) h((1+u)/2) + Q h((1+v)/2).
///
/// For Q <= 15.9% and sqrt(C/2)/(1-Q) comfortably below 1 the derivative
/// in u is strictly positive on the feasible interval, so the maximum sits
/// at u_max = sqrt(C/2)/(1-Q). Outside that region the closed form is not
/// trusted and a bounded numeric maximization is used instead, tagged in
/// `method`. This covers both Q > 15.9% (the monotonicity claim is
/// unproven there) and the thin high-C sliver where u_max clips at 1:
/// there h'((1+u)/2) diverges logarithmically at u = 1, the derivative
/// turns negative within ~5e-5 of the endpoint, and the true maximum sits
/// just inside the interval (up to ~2e-5 bits above the endpoint value).
///
/// (Q, C) pairs with C/2 above (1-Q)^2 + Q^2 cannot come from any Bell
/// spectrum and are rejected as infeasible rather than clamped; noisy
/// finite-sample estimates can land there.
pub fn eve_information(q: f64, c: f64) -> Result<SecurityEstimate> {
    if !(0.0..0.5).contains(&q) {
        return Err(Error::OutOfRange {
            name: "Q",
            value: q,
            min: 0.0,
            max: 0.5,
        });
    }
    if !(0.0..=2.0).contains(&c) {
        return Err(Error::OutOfRange {
            name: "C",
            value: c,
            min: 0.0,
            max: 2.0,
        });
    }
    let cap = (1.0 - q).powi(2) + q * q;
    if c / 2.0 > cap + 1e-12 {
        return Err(Error::Infeasible { q, c, cap });
    }

    if q == 0.0 {
        // I_E(0, C) = h((1 + sqrt(C/2))/2); the Psi block carries no weight.
        let u = (c / 2.0).sqrt().min(1.0);
        let ie = binary_entropy((1.0 + u) / 2.0)?;
        return Ok(SecurityEstimate {
            q,
            c,
            eve_info: ie,
            key_rate: 1.0 - ie,
            u_opt: u,
            v_opt: 0.0,
            feasible: true,
            method: OptMethod::ClosedForm,
        });
    }

    let half_c = c / 2.0;
    let u_max_raw = half_c.sqrt() / (1.0 - q);
    let u_max = u_max_raw.min(1.0);
    let u_min = ((half_c - q * q).max(0.0).sqrt() / (1.0 - q)).min(u_max);
    let v_of_u = |u: f64| (((half_c - (1.0 - q).powi(2) * u * u).max(0.0)).sqrt() / q).min(1.0);
    let ie_of_u = |u: f64| {
        (1.0 - q) * binary_entropy((1.0 + u) / 2.0).expect("u in [0,1]")
            + q * binary_entropy((1.0 + v_of_u(u)) / 2.0).expect("v in [0,1]")
    };

    // Monotonicity (hence the endpoint evaluation) is only safe while the
    // endpoint stays clear of the u = 1 entropy singularity: a dip appears
    // once 1 - u_max < 2^(-2(1-Q)/(Q ln 2)), which for Q <= 15.9% means
    // within ~5e-5 of 1. The 1e-3 margin is comfortably outside it.
    let closed_form_valid = q <= CLOSED_FORM_QBER_LIMIT && u_max_raw <= 1.0 - 1e-3;
    let (u_opt, method) = if closed_form_valid {
        (u_max, OptMethod::ClosedForm)
    } else {
        (
            maximize_on_interval(&ie_of_u, u_min, u_max),
            OptMethod::Numeric,
        )
    };

    let ie = ie_of_u(u_opt);
    let rate = 1.0 - binary_entropy(q)? - ie;
    Ok(SecurityEstimate {
        q,
        c,
        eve_info: ie,
        key_rate: rate,
        u_opt,
        v_opt: v_of_u(u_opt),
        feasible: true,
        method,
    })
}

/// Coarse grid bracketing followed by golden-section refinement.
fn maximize_on_interval(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi - lo < 1e-15 {
        return hi;
    }
    const COARSE: usize = 256;
    let mut best_i = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..=COARSE {
        let u = lo + (hi - lo) * i as f64 / COARSE as f64;
        let val = f(u);
        if val > best_val {
            best_val = val;
            best_i = i;
        }
    }
    let step = (hi - lo) / COARSE as f64;
    let mut a = (lo + step * (best_i as f64 - 1.0)).max(lo);
    let mut b = (lo + step * (best_i as f64 + 1.0)).min(hi);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > 1e-12 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    // The refined point competes against the raw interval endpoints.
    let mid = 0.5 * (a + b);
    [mid, lo, hi]
        .into_iter()
        .max_by(|&p, &q| f(p).partial_cmp(&f(q)).unwrap())
        .unwrap()
}

/// The six-state protocol curve at the same QBER, used purely as an
/// independent cross-check: on the Werner relation C = 2(1-2Q)^2 the
/// protocol's bound coincides with it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixStateReference {
    pub eve_info: f64,
    pub key_rate: f64,
}

/// I_E(Q) = Q + (1-Q) h((1 - 3Q/2)/(1 - Q)) and r = 1 - h(Q) - I_E.
pub fn six_state_reference(q: f64) -> Result<SixStateReference> {
    if !(0.0..2.0 / 3.0).contains(&q) {
        return Err(Error::OutOfRange {
            name: "Q",
            value: q,
            min: 0.0,
            max: 2.0 / 3.0,
        });
    }
    let arg = (1.0 - 1.5 * q) / (1.0 - q);
    let eve_info = q + (1.0 - q) * binary_entropy(arg)?;
    let key_rate = 1.0 - binary_entropy(q)? - eve_info;
    Ok(SixStateReference { eve_info, key_rate })
}

/// The Werner benchmark relation C(Q) = 2 (1 - 2Q)^2.
pub fn werner_c_of_q(q: f64) -> f64 {
    2.0 * (1.0 - 2.0 * q) * (1.0 - 2.0 * q)
}

/// One SecurityEstimate per grid point; infeasible (Q, C) pairs become
/// flagged rows instead of being dropped. Other errors propagate.
pub fn key_rate_curve(
    q_grid: &[f64],
    c_of_q: impl Fn(f64) -> f64,
) -> Result<Vec<SecurityEstimate>> {
    q_grid
        .iter()
        .map(|&q| {
            let c = c_of_q(q);
            match eve_information(q, c) {
                Ok(est) => Ok(est),
                Err(Error::Infeasible { .. }) => Ok(SecurityEstimate::infeasible(q, c)),
                Err(other) => Err(other),
            }
        })
        .collect()
}

/// Locates a zero of r(Q) on [lo, hi] by bisection; returns None when the
/// rate does not change sign across the interval.
pub fn rate_zero_crossing(
    c_of_q: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let rate = |q: f64| -> Result<f64> { Ok(eve_information(q, c_of_q(q))?.key_rate) };
    let mut a = lo;
    let mut b = hi;
    let mut fa = rate(a)?;
    let fb = rate(b)?;
    if fa == 0.0 {
        return Ok(Some(a));
    }
    if fb == 0.0 {
        return Ok(Some(b));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = rate(mid)?;
        if fm == 0.0 {
            return Ok(Some(mid));
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}
