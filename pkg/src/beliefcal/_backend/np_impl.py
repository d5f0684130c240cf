"""Pure-numpy backend: vectorized implementations of the hot kernels.

This is the reference path. The numba backend (`nb_impl`) implements the
same functions with explicit loops; `tests/test_backends.py` pins the two
against each other. Gradient conventions for the recurrent tracker are
documented on `train_epoch`.
"""

from __future__ import annotations

import math

import numpy as np

from .series import (
    CONC_CLAMP,
    DIGAMMA_TAIL,
    HALF_LOG_2PI,
    LGAMMA_TAIL,
    LOSS_BM_EXP,
    LOSS_BM_SOFTPLUS,
    LOSS_CE,
    LOSS_LS_PAPER,
    LOSS_LS_STANDARD,
    MAP_EXP,
    MAP_SOFTPLUS_PLUS_ONE,
    SHIFT_AT,
    TRIGAMMA_TAIL,
)

NAME = "numpy"


# ---------------------------------------------------------------------------
# gamma-family special functions (positive arguments)

def digamma(x: np.ndarray) -> np.ndarray:
    """Elementwise psi(x) for x > 0 via recurrence shift + asymptotic series."""
    x = np.array(x, dtype=np.float64, copy=True)
    shift = np.zeros_like(x)
    for _ in range(10):  # x > 0, so ten unit shifts always reach SHIFT_AT
        small = x < SHIFT_AT
        if not small.any():
            break
        shift += np.where(small, 1.0 / x, 0.0)
        x += small
    r = 1.0 / (x * x)
    t = DIGAMMA_TAIL
    poly = t[0] - r * (t[1] - r * (t[2] - r * (t[3] - r * (t[4] - r * (t[5] - r * t[6])))))
    # Horner above is written with alternating signs folded in:
    # psi = ln x - 1/(2x) - r*(1/12 - r*(1/120 - ...)).
    return np.log(x) - 0.5 / x - r * poly - shift


def trigamma(x: np.ndarray) -> np.ndarray:
    """Elementwise psi_1(x) for x > 0."""
    x = np.array(x, dtype=np.float64, copy=True)
    shift = np.zeros_like(x)
    for _ in range(10):
        small = x < SHIFT_AT
        if not small.any():
            break
        shift += np.where(small, 1.0 / (x * x), 0.0)
        x += small
    r = 1.0 / (x * x)
    t = TRIGAMMA_TAIL
    poly = t[0] - r * (t[1] - r * (t[2] - r * (t[3] - r * (t[4] - r * (t[5] - r * t[6])))))
    return 1.0 / x + 0.5 * r + poly / (x * x * x) + shift


def lgamma_fn(x: np.ndarray) -> np.ndarray:
    """Elementwise ln Gamma(x) for x > 0 (Stirling series after shifting)."""
    x = np.array(x, dtype=np.float64, copy=True)
    shift = np.zeros_like(x)
    for _ in range(10):
        small = x < SHIFT_AT
        if not small.any():
            break
        shift += np.where(small, np.log(x), 0.0)
        x += small
    r = 1.0 / (x * x)
    t = LGAMMA_TAIL
    poly = t[0] - r * (t[1] - r * (t[2] - r * (t[3] - r * (t[4] - r * (t[5] - r * t[6])))))
    return (x - 0.5) * np.log(x) - x + HALF_LOG_2PI + poly / x - shift


# ---------------------------------------------------------------------------
# elementary pieces

def _softmax2d(z: np.ndarray) -> np.ndarray:
    m = z.max(axis=1, keepdims=True)
    e = np.exp(z - m)
    return e / e.sum(axis=1, keepdims=True)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0, z + np.log1p(np.exp(-np.abs(z))), np.log1p(np.exp(-np.abs(z)) ** 0 * np.exp(np.minimum(z, 0))))


def concentration2d(z: np.ndarray, map_code: int) -> np.ndarray:
    """Row-wise logits -> Dirichlet concentrations."""
    if map_code == MAP_EXP:
        return np.exp(np.clip(z, -CONC_CLAMP, CONC_CLAMP))
    if map_code == MAP_SOFTPLUS_PLUS_ONE:
        # stable softplus: log(1 + e^z) = max(z, 0) + log1p(e^{-|z|})
        return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z))) + 1.0
    raise ValueError(f"unknown concentration map code {map_code}")


def _concentration_deriv(z: np.ndarray, a: np.ndarray, map_code: int) -> np.ndarray:
    if map_code == MAP_EXP:
        return np.where(np.abs(z) <= CONC_CLAMP, a, 0.0)
    return _sigmoid(z)


# ---------------------------------------------------------------------------
# batched per-example losses: (values, grads) with grads w.r.t. logits

def ce_loss(z: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = z.shape[0]
    m = z.max(axis=1)
    lse = m + np.log(np.exp(z - m[:, None]).sum(axis=1))
    rows = np.arange(n)
    values = lse - z[rows, y]
    grads = _softmax2d(z)
    grads[rows, y] -= 1.0
    return values, grads


def _smoothed_targets(y: np.ndarray, k: int, alpha: float) -> np.ndarray:
    t = np.full((y.size, k), alpha)
    t[np.arange(y.size), y] = 1.0 - (k - 1) * alpha
    return t


def ls_loss(z: np.ndarray, y: np.ndarray, alpha: float,
            paper_direction: bool) -> tuple[np.ndarray, np.ndarray]:
    k = z.shape[1]
    p = _softmax2d(z)
    t = _smoothed_targets(y, k, alpha)
    m = z.max(axis=1, keepdims=True)
    logp = (z - m) - np.log(np.exp(z - m).sum(axis=1, keepdims=True))
    logt = np.log(t)
    if paper_direction:
        u = logp - logt
        values = (p * u).sum(axis=1)
        grads = p * (u - values[:, None])
    else:
        values = (t * (logt - logp)).sum(axis=1)
        grads = p - t
    return values, grads


def dirichlet_kl_uniform2d(a: np.ndarray) -> np.ndarray:
    """Row-wise KL from Dir(row) to the flat Dirichlet over the same arity."""
    k = a.shape[1]
    a0 = a.sum(axis=1)
    lg_a = lgamma_fn(a.ravel()).reshape(a.shape)
    dg_a = digamma(a.ravel()).reshape(a.shape)
    dg_a0 = digamma(a0)
    return (lgamma_fn(a0) - math.lgamma(k) - lg_a.sum(axis=1)
            + ((a - 1.0) * (dg_a - dg_a0[:, None])).sum(axis=1))


def dirichlet_expected_nll2d(a: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise -E[ln pi_y] = psi(a0) - psi(a_y)."""
    rows = np.arange(a.shape[0])
    return digamma(a.sum(axis=1)) - digamma(a[rows, y])


def bm_loss(z: np.ndarray, y: np.ndarray, lam: float,
            map_code: int) -> tuple[np.ndarray, np.ndarray]:
    k = z.shape[1]
    rows = np.arange(z.shape[0])
    a = concentration2d(z, map_code)
    da = _concentration_deriv(z, a, map_code)
    a0 = a.sum(axis=1)
    values = lam * dirichlet_kl_uniform2d(a) + dirichlet_expected_nll2d(a, y)
    tg_a = trigamma(a.ravel()).reshape(a.shape)
    tg_a0 = trigamma(a0)
    dkl = (a - 1.0) * tg_a - ((a0 - k) * tg_a0)[:, None]
    dnll = tg_a0[:, None].repeat(k, axis=1)
    dnll[rows, y] -= tg_a[rows, y]
    grads = (lam * dkl + dnll) * da
    return values, grads


def _loss_batch(z: np.ndarray, y: np.ndarray, loss_code: int,
                loss_param: float) -> tuple[np.ndarray, np.ndarray]:
    if loss_code == LOSS_CE:
        return ce_loss(z, y)
    if loss_code == LOSS_LS_STANDARD:
        return ls_loss(z, y, loss_param, False)
    if loss_code == LOSS_LS_PAPER:
        return ls_loss(z, y, loss_param, True)
    if loss_code == LOSS_BM_EXP:
        return bm_loss(z, y, loss_param, MAP_EXP)
    if loss_code == LOSS_BM_SOFTPLUS:
        return bm_loss(z, y, loss_param, MAP_SOFTPLUS_PLUS_ONE)
    raise ValueError(f"unknown loss code {loss_code}")


# ---------------------------------------------------------------------------
# recurrent tracker kernels
#
# Model: gated turn-state update over a dialogue's feature vectors
#   g_t = sigmoid(Ug x_t + Vg h_{t-1} + bg)         (blend gate)
#   c_t = tanh(Uc x_t + Vc h_{t-1} + bc)            (candidate state)
#   h_t = (g_t * c_t + (1 - g_t) * h_{t-1}) * m     (m: dropout mask)
#   logits_t = h_t @ W + b                          (packed slot heads)
# where h_{t-1} is the already-masked previous state and the packed head
# matrix W is (H, sum of candidate counts), sliced per slot by offsets.


def _stage_batch(feats, labels, offsets, dial, s_count):
    lens = offsets[dial + 1] - offsets[dial]
    t_max = int(lens.max())
    b = dial.size
    x = np.zeros((t_max, b, feats.shape[1]))
    yy = np.zeros((t_max, b, s_count), dtype=np.int64)
    alive = np.zeros((t_max, b), dtype=bool)
    for j, d in enumerate(dial):
        t0, t1 = offsets[d], offsets[d + 1]
        n = t1 - t0
        x[:n, j] = feats[t0:t1]
        yy[:n, j] = labels[t0:t1]
        alive[:n, j] = True
    return x, yy, alive, lens, t_max


def corpus_forward(ug, vg, bg, uc, vc, bc, w, b, feats, offsets,
                   masks) -> np.ndarray:
    """Per-turn packed logits for every dialogue, lockstep across dialogues."""
    d_count = offsets.size - 1
    dial = np.arange(d_count)
    lens = offsets[1:] - offsets[:-1]
    t_max = int(lens.max()) if d_count else 0
    h = np.zeros((d_count, ug.shape[0]))
    logits = np.empty((feats.shape[0], w.shape[1]))
    for t in range(t_max):
        alive = lens > t
        x = np.zeros((d_count, feats.shape[1]))
        x[alive] = feats[offsets[:-1][alive] + t]
        g = _sigmoid(x @ ug.T + h @ vg.T + bg)
        c = np.tanh(x @ uc.T + h @ vc.T + bc)
        h = (g * c + (1.0 - g) * h) * masks
        out = h @ w + b
        logits[offsets[:-1][alive] + t] = out[alive]
    return logits


def train_epoch(ug, vg, bg, uc, vc, bc, w, b, feats, labels, offsets,
                slot_offs, order, batch_size, masks, loss_code, loss_param,
                lr) -> float:
    """One epoch of mini-batch gradient descent; parameters update in place.

    Batches are consecutive chunks of `order`. Per batch the objective is
    the mean per-example loss over all (turn, slot) examples for the
    cross-entropy / label-smoothing losses and the sum for the
    Dirichlet-matching losses. Returns the mean per-batch objective.
    """
    d_count = order.size
    h_dim = ug.shape[0]
    s_count = slot_offs.size - 1
    is_sum_loss = loss_code in (LOSS_BM_EXP, LOSS_BM_SOFTPLUS)

    total = 0.0
    n_batches = 0
    for start in range(0, d_count, batch_size):
        dial = order[start:start + batch_size]
        bsz = dial.size
        x, yy, alive, lens, t_max = _stage_batch(feats, labels, offsets, dial, s_count)
        m = masks[dial]
        n_ex = int(lens.sum()) * s_count
        scale = 1.0 if is_sum_loss else 1.0 / n_ex

        # forward with caches
        g_c = np.empty((t_max, bsz, h_dim))
        c_c = np.empty((t_max, bsz, h_dim))
        hprev_c = np.empty((t_max, bsz, h_dim))
        htil_c = np.empty((t_max, bsz, h_dim))
        logits = np.empty((t_max, bsz, w.shape[1]))
        h = np.zeros((bsz, h_dim))
        for t in range(t_max):
            hprev_c[t] = h
            g = _sigmoid(x[t] @ ug.T + h @ vg.T + bg)
            c = np.tanh(x[t] @ uc.T + h @ vc.T + bc)
            h = (g * c + (1.0 - g) * h) * m
            g_c[t], c_c[t], htil_c[t] = g, c, h
            logits[t] = h @ w + b

        # per-slot loss values and logits gradients
        dlogits = np.zeros_like(logits)
        batch_value = 0.0
        for s in range(s_count):
            k0, k1 = slot_offs[s], slot_offs[s + 1]
            z = logits[:, :, k0:k1].reshape(-1, k1 - k0)
            ys = yy[:, :, s].ravel()
            vals, grads = _loss_batch(z, ys, loss_code, loss_param)
            keep = alive.ravel()
            batch_value += float(vals[keep].sum())
            grads[~keep] = 0.0
            dlogits[:, :, k0:k1] = grads.reshape(t_max, bsz, k1 - k0) * scale

        # backward through heads and the gated recurrence
        dw = np.einsum("tbh,tbk->hk", htil_c, dlogits)
        db = dlogits.sum(axis=(0, 1))
        dug = np.zeros_like(ug)
        dvg = np.zeros_like(vg)
        dbg = np.zeros_like(bg)
        duc = np.zeros_like(uc)
        dvc = np.zeros_like(vc)
        dbc = np.zeros_like(bc)
        dh_next = np.zeros((bsz, h_dim))
        for t in range(t_max - 1, -1, -1):
            dhtil = dlogits[t] @ w.T + dh_next
            dh = dhtil * m
            dg = dh * (c_c[t] - hprev_c[t])
            dc = dh * g_c[t]
            dag = dg * g_c[t] * (1.0 - g_c[t])
            dac = dc * (1.0 - c_c[t] * c_c[t])
            dug += dag.T @ x[t]
            dvg += dag.T @ hprev_c[t]
            dbg += dag.sum(axis=0)
            duc += dac.T @ x[t]
            dvc += dac.T @ hprev_c[t]
            dbc += dac.sum(axis=0)
            dh_next = dag @ vg + dac @ vc + dh * (1.0 - g_c[t])

        ug -= lr * dug
        vg -= lr * dvg
        bg -= lr * dbg
        uc -= lr * duc
        vc -= lr * dvc
        bc -= lr * dbc
        w -= lr * dw
        b -= lr * db

        total += batch_value * scale if not is_sum_loss else batch_value
        n_batches += 1
    return total / n_batches
