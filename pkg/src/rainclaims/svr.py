"""Tube-loss support vector regression trained through its dual problem.

The dual is solved by sequential two-variable updates over the paired
coefficient vectors (alpha_up raises the fit, alpha_down lowers it): the most
violating coordinate is paired with the partner giving the largest
second-order gain, stepped to the pair optimum, and clipped to the box.
The equality constraint sum(alpha_up - alpha_down) = 0 is preserved exactly
by construction. Features and target are z-scored before fitting, so the
tube half-width ``epsilon`` is expressed in scaled target units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import SvrConvergenceError
from .kernels import RBF, KernelSpec, gram_matrix, kernel_cross

DEFAULT_KKT_TOL = 1e-3
DEFAULT_MAX_ITER = 1_000_000


@dataclass(frozen=True)
class SvrHyperparams:
    """Per-point penalty ``c``, tube half-width ``epsilon``, kernel choice."""

    c: float = 1.0
    epsilon: float = 0.1
    kernel: KernelSpec = field(default_factory=KernelSpec)

    def validate(self) -> None:
        if not self.c > 0:
            raise ValueError(f"penalty must be positive, got {self.c}")
        if self.epsilon < 0:
            raise ValueError(f"tube half-width must be non-negative, got {self.epsilon}")
        self.kernel.validate()


@dataclass(frozen=True)
class Scaler:
    """Z-score parameters for features and target.

    Constant columns keep std 1 so scaling stays invertible; the flags record
    which columns were constant.
    """

    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float
    x_const: np.ndarray
    y_const: bool

    @classmethod
    def fit(cls, x: np.ndarray, y: np.ndarray) -> "Scaler":
        x_mean = x.mean(axis=0)
        x_std = x.std(axis=0)
        x_const = x_std == 0.0
        x_std = np.where(x_const, 1.0, x_std)
        y_mean = float(y.mean())
        y_std = float(y.std())
        y_const = y_std == 0.0
        if y_const:
            y_std = 1.0
        return cls(x_mean, x_std, y_mean, y_std, x_const, y_const)

    def transform_x(self, x: np.ndarray) -> np.ndarray:
        return (x - self.x_mean) / self.x_std

    def transform_y(self, y: np.ndarray) -> np.ndarray:
        return (y - self.y_mean) / self.y_std

    def inverse_y(self, y_scaled):
        return self.y_mean + self.y_std * y_scaled


@dataclass(frozen=True)
class SvrModel:
    """Trained regressor: scaled training inputs, dual coefficient differences
    ``theta``, bias, kernel and the scaler needed to map back to data units."""

    support_x: np.ndarray
    theta: np.ndarray
    bias: float
    kernel: KernelSpec
    scaler: Scaler
    hyperparams: SvrHyperparams
    alpha_up: np.ndarray | None = None
    alpha_down: np.ndarray | None = None
    dual_objective_value: float | None = None
    kkt_violation: float | None = None
    iterations: int | None = None
    fitted: np.ndarray | None = None

    @property
    def n_features(self) -> int:
        return self.support_x.shape[1]


def eps_insensitive_loss(residual: float, epsilon: float) -> float:
    """Zero inside the tube, |r| - epsilon outside."""
    if epsilon < 0:
        raise ValueError(f"tube half-width must be non-negative, got {epsilon}")
    return max(0.0, abs(residual) - epsilon)


@njit(cache=True)
def _smo_core(k, diag, y, c, eps, tol, max_iter, hist):  # pragma: no cover - jitted
    n = y.shape[0]
    up = np.zeros(n)  # coefficients pushing the fit up (alpha*)
    down = np.zeros(n)  # coefficients pushing the fit down (alpha)
    # margin of the raise-side coordinate: fu = y - eps - k @ (up - down);
    # the lower-side margin is fu + 2*eps
    fu = y - eps
    record = hist.shape[0] > 0
    obj = 0.0
    it = 0

    # most violating coordinate on each side of the bias interval
    m_val = -np.inf
    m_idx = -1
    m_is_up = True
    big_m = np.inf
    for i in range(n):
        fui = fu[i]
        fdi = fui + 2.0 * eps
        if up[i] < c and fui > m_val:
            m_val = fui
            m_idx = i
            m_is_up = True
        if down[i] > 0.0 and fdi > m_val:
            m_val = fdi
            m_idx = i
            m_is_up = False
        if up[i] > 0.0 and fui < big_m:
            big_m = fui
        if down[i] < c and fdi < big_m:
            big_m = fdi
    viol = m_val - big_m

    while viol > tol and it < max_iter:
        # partner with the largest second-order gain diff^2/curv, compared
        # cross-multiplied to avoid a division per candidate
        kaa = diag[m_idx]
        krow_a = k[m_idx]
        best_diff = 0.0
        best_curv = 1.0
        q_idx = -1
        q_is_up = True
        q_val = 0.0
        for j in range(n):
            fuj = fu[j]
            fdj = fuj + 2.0 * eps
            take_u = up[j] > 0.0 and fuj < m_val
            take_d = down[j] < c and fdj < m_val
            if not (take_u or take_d):
                continue
            curv = kaa + diag[j] - 2.0 * krow_a[j]
            if curv < 1e-12:
                curv = 1e-12
            if take_u:
                diff = m_val - fuj
                if diff * diff * best_curv > best_diff * best_diff * curv:
                    best_diff = diff
                    best_curv = curv
                    q_idx = j
                    q_is_up = True
                    q_val = fuj
            if take_d:
                diff = m_val - fdj
                if diff * diff * best_curv > best_diff * best_diff * curv:
                    best_diff = diff
                    best_curv = curv
                    q_idx = j
                    q_is_up = False
                    q_val = fdj
        if q_idx < 0:
            break

        curv_true = kaa + diag[q_idx] - 2.0 * krow_a[q_idx]
        curv = curv_true if curv_true > 1e-12 else 1e-12
        delta = (m_val - q_val) / curv
        # box limits: the selected coordinate raises theta[m_idx] and lowers
        # theta[q_idx] by delta
        if m_is_up:
            lim = c - up[m_idx]
        else:
            lim = down[m_idx]
        if lim < delta:
            delta = lim
        if q_is_up:
            lim = up[q_idx]
        else:
            lim = c - down[q_idx]
        if lim < delta:
            delta = lim

        if m_is_up:
            up[m_idx] += delta
            if up[m_idx] > c:
                up[m_idx] = c
        else:
            down[m_idx] -= delta
            if down[m_idx] < 0.0:
                down[m_idx] = 0.0
        if q_is_up:
            up[q_idx] -= delta
            if up[q_idx] < 0.0:
                up[q_idx] = 0.0
        else:
            down[q_idx] += delta
            if down[q_idx] > c:
                down[q_idx] = c
        if record:
            curv_gain = curv_true if curv_true > 0.0 else 0.0
            obj += (m_val - q_val) * delta - 0.5 * curv_gain * delta * delta
            if it < hist.shape[0]:
                hist[it] = obj
        it += 1

        # fused pass: apply the margin update and rescan for the next pair
        # (krow_a == krow_b when both coordinates sit on one sample, so the
        # update is a no-op there, which is exactly right)
        krow_b = k[q_idx]
        m_val = -np.inf
        m_idx = -1
        m_is_up = True
        big_m = np.inf
        for i in range(n):
            fui = fu[i] - delta * (krow_a[i] - krow_b[i])
            fu[i] = fui
            fdi = fui + 2.0 * eps
            if up[i] < c and fui > m_val:
                m_val = fui
                m_idx = i
                m_is_up = True
            if down[i] > 0.0 and fdi > m_val:
                m_val = fdi
                m_idx = i
                m_is_up = False
            if up[i] > 0.0 and fui < big_m:
                big_m = fui
            if down[i] < c and fdi < big_m:
                big_m = fdi
        viol = m_val - big_m

    # bias: average over coefficients strictly inside the box, else the
    # midpoint of the feasible interval
    b_sum = 0.0
    b_count = 0
    for i in range(n):
        if 0.0 < up[i] < c:
            b_sum += fu[i]
            b_count += 1
        if 0.0 < down[i] < c:
            b_sum += fu[i] + 2.0 * eps
            b_count += 1
    if b_count > 0:
        bias = b_sum / b_count
    else:
        bias = 0.5 * (m_val + big_m)

    # enforce complementarity: shrinking both coefficients of a sample leaves
    # theta unchanged and never lowers the objective
    for i in range(n):
        shared = up[i] if up[i] < down[i] else down[i]
        if shared > 0.0:
            up[i] -= shared
            down[i] -= shared

    status = 0 if viol <= tol else 1
    return up, down, bias, it, viol, status


def dual_objective(
    alpha_down: np.ndarray,
    alpha_up: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    hp: SvrHyperparams,
) -> float:
    """Exact dual objective at the given coefficient pair, on the data as passed."""
    alpha_down = np.asarray(alpha_down, dtype=float)
    alpha_up = np.asarray(alpha_up, dtype=float)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    if alpha_down.shape != (n,) or alpha_up.shape != (n,) or y.shape != (n,):
        raise ValueError("coefficient/target vectors must match the number of rows")
    theta = alpha_up - alpha_down
    k = gram_matrix(x, hp.kernel)
    return float(
        -0.5 * theta @ k @ theta
        - hp.epsilon * np.sum(alpha_up + alpha_down)
        + y @ theta
    )


def svr_fit(
    x: np.ndarray,
    y: np.ndarray,
    hp: SvrHyperparams,
    kkt_tol: float = DEFAULT_KKT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    objective_history: np.ndarray | None = None,
) -> SvrModel:
    """Fit the regressor; raises SvrConvergenceError past the iteration cap.

    ``objective_history``, when given, is filled in place with the dual
    objective after each pair update (for diagnostics on small problems).
    """
    hp.validate()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise ValueError(f"need at least two samples, got {n}")
    if y.shape != (n,):
        raise ValueError(f"target shape {y.shape} does not match {n} rows")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise SvrConvergenceError("training data contains NaN or Inf", np.inf, 0)

    scaler = Scaler.fit(x, y)
    xs = scaler.transform_x(x)
    ys = scaler.transform_y(y)
    k = gram_matrix(xs, hp.kernel)

    diag = np.ascontiguousarray(np.diag(k))
    hist = objective_history if objective_history is not None else np.empty(0)
    up, down, bias, iters, viol, status = _smo_core(
        k, diag, ys, float(hp.c), float(hp.epsilon), float(kkt_tol), int(max_iter), hist
    )
    if status != 0:
        raise SvrConvergenceError(
            f"dual solver did not converge in {iters} pair updates "
            f"(KKT violation {viol:.3e} > tolerance {kkt_tol:.1e})",
            kkt_violation=float(viol),
            iterations=int(iters),
        )
    theta = up - down
    objective = dual_objective(down, up, xs, ys, hp)
    fitted = scaler.inverse_y(k @ theta + bias)
    return SvrModel(
        support_x=xs,
        theta=theta,
        bias=float(bias),
        kernel=hp.kernel,
        scaler=scaler,
        hyperparams=hp,
        alpha_up=up,
        alpha_down=down,
        dual_objective_value=objective,
        kkt_violation=float(viol),
        iterations=int(iters),
        fitted=fitted,
    )


def svr_predict(model: SvrModel, x: np.ndarray):
    """Prediction in original target units; accepts one vector or a matrix."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    if x2.shape[1] != model.n_features:
        raise ValueError(
            f"expected {model.n_features} features, got {x2.shape[1]}"
        )
    xs = model.scaler.transform_x(x2)
    k = kernel_cross(xs, model.support_x, model.kernel)
    out = model.scaler.inverse_y(k @ model.theta + model.bias)
    return float(out[0]) if single else out


def default_rbf_hyperparams() -> SvrHyperparams:
    """The fixed-benchmark triple: c=1, bandwidth 1, tube 0.1."""
    return SvrHyperparams(c=1.0, epsilon=0.1, kernel=KernelSpec(RBF, 1.0))
