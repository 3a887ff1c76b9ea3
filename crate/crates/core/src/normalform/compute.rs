use serde::{Deserialize, Serialize};

use super::resonance::ResonanceTolerance;
use crate::embedding::Spectrum;
use crate::error::{Error, Result};
use crate::linalg::{eig, inverse};
use crate::polyalg::series::{Series, SeriesRing};
use crate::polyalg::{MonomialBasis, PolyMap};
use crate::scalar::{cabs, lit, to_f64, CMatrix, CVector, Real, C};

/// Near-identity normal form of reduced dynamics `ξ̇ = G(ξ)`.
///
/// With `W` the eigenvectors of the linear part of `G` (scaled to unit
/// diagonal), `ξ = W·H(ζ)` and `ζ̇ = N(ζ)`, where `H` has identity linear
/// part and `N` is `diag(λ)` plus resonant terms only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NormalForm<T: Real> {
    pub lambdas: Vec<C<T>>,
    pub modal_basis: CMatrix<T>,
    pub modal_basis_inv: CMatrix<T>,
    pub h: PolyMap<T>,
    pub n: PolyMap<T>,
    pub resonant_set: Vec<(usize, Vec<u32>)>,
    pub order: u32,
    pub tolerance: ResonanceTolerance<T>,
    /// Index of each mode's complex-conjugate partner.
    pub conjugation: Vec<usize>,
    /// `G` expressed in the modal coordinates `η = W⁻¹ξ`.
    pub g_modal: PolyMap<T>,
}

impl<T: Real> NormalForm<T> {
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// `ξ = W·H(ζ)`.
    pub fn to_reduced(&self, zeta: &[C<T>]) -> Result<CVector<T>> {
        Ok(&self.modal_basis * self.h.eval(zeta)?)
    }

    /// `ζ̇ = N(ζ)`.
    pub fn vector_field(&self, zeta: &[C<T>]) -> Result<CVector<T>> {
        self.n.eval(zeta)
    }

    /// Spectrum of the normal form with its conjugate pairing.
    pub fn spectrum(&self) -> Result<Spectrum<T>> {
        Spectrum::scalar(self.lambdas.clone())
    }
}

/// Averages each coefficient with the conjugate of its mirror image under
/// the mode conjugation `perm`, which both permutes outputs and variables.
pub fn conjugate_symmetrize<T: Real>(map: &PolyMap<T>, perm: &[usize]) -> PolyMap<T> {
    let basis = map.basis();
    let mut out = map.coeffs().clone();
    let half = lit::<T>(0.5);
    for (t, e) in basis.exponents().iter().enumerate() {
        let mut mirrored = vec![0u32; e.len()];
        for (j, &ej) in e.iter().enumerate() {
            mirrored[perm[j]] = ej;
        }
        let Some(tm) = basis.index_of(&mirrored) else { continue };
        for k in 0..map.n_out() {
            out[(k, t)] = (map.coeffs()[(k, t)] + map.coeffs()[(perm[k], tm)].conj()).scale(half);
        }
    }
    PolyMap::new(out, basis.clone()).expect("same shape")
}

/// Diagonalizes the linear part: eigenvalues ordered so that eigenvector
/// `k` is dominated by coordinate `k`, columns scaled to `W_kk = 1`.
fn modal_rotation<T: Real>(g1: &CMatrix<T>, perm: Option<&[usize]>) -> Result<(Vec<C<T>>, CMatrix<T>)> {
    let d = g1.nrows();
    let (lam, vecs) = eig(g1)?;
    let mut assigned = vec![usize::MAX; d];
    let mut taken = vec![false; d];
    let mut entries: Vec<(T, usize, usize)> = Vec::with_capacity(d * d);
    for c in 0..d {
        for r in 0..d {
            entries.push((cabs(vecs[(r, c)]), r, c));
        }
    }
    entries.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for (_, r, c) in entries {
        if assigned[r] == usize::MAX && !taken[c] {
            assigned[r] = c;
            taken[c] = true;
        }
    }
    let mut lambdas = Vec::with_capacity(d);
    let mut w = CMatrix::zeros(d, d);
    for k in 0..d {
        let c = assigned[k];
        let pivot = vecs[(k, c)];
        lambdas.push(lam[c]);
        w.set_column(k, &vecs.column(c).map(|z| z / pivot));
    }
    if let Some(perm) = perm {
        for k in 0..d {
            let kc = perm[k];
            if kc > k {
                let avg = (lambdas[k] + lambdas[kc].conj()).scale(lit(0.5));
                lambdas[k] = avg;
                lambdas[kc] = avg.conj();
                let mut col = CVector::zeros(d);
                for r in 0..d {
                    col[perm[r]] = (w[(r, k)].conj() + w[(perm[r], kc)]).scale(lit(0.5));
                }
                for r in 0..d {
                    w[(r, kc)] = col[r];
                    w[(perm[r], k)] = col[r].conj();
                }
            } else if kc == k {
                lambdas[k].im = T::zero();
            }
        }
    }
    Ok((lambdas, w))
}

/// Infers the conjugation permutation from a spectrum.
fn infer_conjugation<T: Real>(lambdas: &[C<T>]) -> Option<Vec<usize>> {
    Spectrum::scalar(lambdas.to_vec()).ok().map(|s| s.conjugation())
}

/// Options for [`compute_normal_form`].
#[derive(Debug, Clone, Default)]
pub struct NormalFormOptions<T: Real> {
    pub tolerance: ResonanceTolerance<T>,
    /// Conjugate partner of each reduced coordinate; inferred from the
    /// eigenvalues of the linear part when absent.
    pub conjugation: Option<Vec<usize>>,
}

/// Solves the conjugacy `DH·N = G∘H` order by order up to `order`.
///
/// At order `o` the residual `[G∘H − DH·N]_o` (with `H_o = N_o = 0`) is
/// assigned to `N_o` for resonant terms; the remaining terms go into `H_o`
/// after division by `⟨m, λ⟩ − λ_k`.
pub fn compute_normal_form<T: Real>(g: &PolyMap<T>, order: u32, options: &NormalFormOptions<T>) -> Result<NormalForm<T>> {
    let d = g.dim();
    if g.n_out() != d {
        return Err(Error::DimensionMismatch(format!(
            "dynamics map has {} outputs for {} variables",
            g.n_out(),
            d
        )));
    }
    if order < 1 {
        return Err(Error::InvalidArgument("normal-form order must be ≥ 1".into()));
    }
    if g.basis().l_min() > 1 {
        return Err(Error::InvalidArgument("dynamics map has no linear part".into()));
    }
    if g.basis().l_min() == 0 {
        let r = g.basis().order_range(0);
        if g.coeffs().columns(r.start, r.len()).iter().any(|z| cabs(*z) > T::zero()) {
            return Err(Error::InvalidArgument("dynamics map has a constant term".into()));
        }
    }
    let g1 = g.order_block(1);
    let perm = match &options.conjugation {
        Some(p) => {
            if p.len() != d || (0..d).any(|k| p[k] >= d || p[p[k]] != k) {
                return Err(Error::InvalidArgument("conjugation is not an involution on the modes".into()));
            }
            Some(p.clone())
        }
        None => modal_rotation(&g1, None).ok().and_then(|(l, _)| {
            // Only pairings consistent with the coordinates are usable.
            let p = infer_conjugation(&l)?;
            let sym = conjugate_symmetrize(g, &p);
            let gap = (sym.coeffs() - g.coeffs()).norm();
            (gap <= lit::<T>(1e-8) * g.coeffs().norm().max(T::one())).then_some(p)
        }),
    };
    let g = match &perm {
        Some(p) => conjugate_symmetrize(g, p),
        None => g.clone(),
    };
    let (lambdas, w) = modal_rotation(&g.order_block(1), perm.as_deref())?;
    let w_inv = inverse(&w)?;
    let conjugation = perm.clone().unwrap_or_else(|| (0..d).collect());

    let ring = SeriesRing::new(d, order)?;
    // Modal dynamics η̇ = W⁻¹ G(Wη).
    let linear: Vec<Series<T>> = (0..d)
        .map(|i| {
            let mut s = ring.zero();
            for j in 0..d {
                let v = ring.variable::<T>(j);
                ring.add_assign(&mut s, &ring.scale(&v, w[(i, j)]));
            }
            s
        })
        .collect();
    let g_xi = ring.compose(&g, &linear)?;
    let g_eta: Vec<Series<T>> = (0..d)
        .map(|i| {
            let mut s = ring.zero();
            for j in 0..d {
                ring.add_assign(&mut s, &ring.scale(&g_xi[j], w_inv[(i, j)]));
            }
            s
        })
        .collect();
    let g_modal = ring.to_polymap(&g_eta, 1, order)?;

    let mut h: Vec<Series<T>> = (0..d).map(|k| ring.variable(k)).collect();
    let mut n: Vec<Series<T>> = (0..d).map(|k| ring.scale(&ring.variable(k), lambdas[k])).collect();
    let mut resonant_set = Vec::new();
    let basis = ring.basis().clone();
    for o in 2..=order {
        let gh = ring.compose(&g_modal, &h)?;
        let range = basis.order_range(o);
        let mut new_h = vec![Vec::new(); d];
        let mut new_n = vec![Vec::new(); d];
        for k in 0..d {
            let mut dhn = ring.zero();
            for j in 0..d {
                let dh = ring.deriv(&h[k], j);
                ring.add_assign(&mut dhn, &ring.mul(&dh, &n[j]));
            }
            for t in range.clone() {
                let e = basis.exponent(t);
                let resid = gh[k][t] - dhn[t];
                if options.tolerance.is_resonant(&lambdas, k, e) {
                    resonant_set.push((k, e.to_vec()));
                    new_n[k].push((t, resid));
                } else {
                    let div = ResonanceTolerance::divisor(&lambdas, k, e);
                    if !(cabs(div) > options.tolerance.tol_abs) {
                        return Err(Error::SmallDivisor {
                            mode: k,
                            exponents: e.to_vec(),
                            divisor: to_f64(cabs(div)),
                        });
                    }
                    new_h[k].push((t, resid / div));
                }
            }
        }
        for k in 0..d {
            for &(t, v) in &new_h[k] {
                h[k][t] = v;
            }
            for &(t, v) in &new_n[k] {
                n[k][t] = v;
            }
        }
    }
    let mut h_map = ring.to_polymap(&h, 1, order)?;
    let mut n_map = ring.to_polymap(&n, 1, order)?;
    if perm.is_some() {
        h_map = conjugate_symmetrize(&h_map, &conjugation);
        n_map = conjugate_symmetrize(&n_map, &conjugation);
    }
    Ok(NormalForm {
        lambdas,
        modal_basis: w,
        modal_basis_inv: w_inv,
        h: h_map,
        n: n_map,
        resonant_set,
        order,
        tolerance: options.tolerance,
        conjugation,
        g_modal,
    })
}

/// Builds the `d`-variable linear map `diag(λ)` over orders `1..=order`.
pub fn diagonal_map<T: Real>(lambdas: &[C<T>], order: u32) -> Result<PolyMap<T>> {
    let basis = MonomialBasis::new(lambdas.len(), 1, order.max(1))?;
    let mut c = CMatrix::zeros(lambdas.len(), basis.len());
    for (k, &l) in lambdas.iter().enumerate() {
        c[(k, k)] = l;
    }
    PolyMap::new(c, basis)
}

