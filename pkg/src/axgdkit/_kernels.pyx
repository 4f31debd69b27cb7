# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops for the benchmark runner.

One fused per-iteration loop covers the three discrete methods on quadratic
objectives f(x) = <Ax, x>/2 - <b, x> for the two shipped geometries
(Euclidean over R^n, entropy over the simplex).  The arithmetic mirrors
solvers.axgd_step, solvers.agd_step and the gradient-descent branch of
solvers.run; the pure-NumPy path is the reference implementation and the
backends are only interchangeable up to floating-point reduction order.

Gradient noise is pre-drawn by the caller (one row per gradient query, in
query order) so the compiled path consumes the same stream as the wrapped
oracle would.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, INFINITY
from libc.stdlib cimport qsort
from posix.time cimport CLOCK_MONOTONIC, clock_gettime, timespec

cnp.import_array()

METHOD_AXGD = 0
METHOD_AGD = 1
METHOD_GD = 2
GEOM_EUCLIDEAN = 0
GEOM_ENTROPY = 1


cdef long long _now_ns() noexcept:
    cdef timespec ts
    clock_gettime(CLOCK_MONOTONIC, &ts)
    return <long long>ts.tv_sec * 1000000000LL + <long long>ts.tv_nsec


cdef void _matvec(const double[:, ::1] M, const double[::1] v,
                  double[::1] out, Py_ssize_t n) noexcept:
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += M[i, j] * v[j]
        out[i] = s


cdef double _dot(const double[::1] x, const double[::1] y, Py_ssize_t n) noexcept:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(n):
        s += x[i] * y[i]
    return s


cdef void _mirror(int geometry, double sigma, const double[::1] z,
                  double[::1] out, Py_ssize_t n) noexcept:
    """grad psi*: z/sigma (Euclidean, unconstrained) or the stabilized
    softmax of z/sigma (entropy over the simplex)."""
    cdef Py_ssize_t i
    cdef double m, s, w
    if geometry == GEOM_EUCLIDEAN:
        for i in range(n):
            out[i] = z[i] / sigma
        return
    m = -INFINITY
    for i in range(n):
        w = z[i] / sigma
        out[i] = w
        if w > m:
            m = w
    s = 0.0
    for i in range(n):
        out[i] = exp(out[i] - m)
        s += out[i]
    for i in range(n):
        out[i] /= s


cdef int _cmp_desc(const void* pa, const void* pb) noexcept nogil:
    cdef double a = (<const double*>pa)[0]
    cdef double b = (<const double*>pb)[0]
    if a < b:
        return 1
    if a > b:
        return -1
    return 0


cdef void _project_simplex(const double[::1] v, double[::1] out,
                           double[::1] work, Py_ssize_t n) noexcept:
    """Euclidean projection onto the simplex (sort + threshold), matching
    prox.project_simplex."""
    cdef Py_ssize_t i, rho = 1
    cdef double css = 0.0, theta = 0.0
    for i in range(n):
        work[i] = v[i]
    qsort(&work[0], n, sizeof(double), _cmp_desc)
    for i in range(n):
        css += work[i]
        if work[i] - (css - 1.0) / (i + 1) > 0.0:
            rho = i + 1
            theta = (css - 1.0) / rho
    for i in range(n):
        out[i] = v[i] - theta
        if out[i] < 0.0:
            out[i] = 0.0


def run_quadratic_cell(int method, int geometry,
                       const double[:, ::1] A_mat, const double[::1] b,
                       const double[::1] x0, const double[::1] weights,
                       double sigma, double L,
                       const double[:, ::1] noise, bint use_noise):
    """Run len(weights) iterations of one method from x0.

    Returns (f_point, f_solution, grad_dot_point, gradients, wall_ns):
    the exact objective at the gradient-query point and at the solution
    point, <g_k, x_k> for the recorded (possibly noisy) gradient, the
    recorded gradients themselves (one row per iteration, the ones a gap
    certificate must consume), and the per-iteration wall time.
    """
    cdef Py_ssize_t n = x0.shape[0]
    cdef Py_ssize_t steps = weights.shape[0]
    cdef Py_ssize_t k, i

    f_pt_arr = np.empty(steps)
    f_sol_arr = np.empty(steps)
    gxp_arr = np.empty(steps)
    grads_arr = np.empty((steps, n))
    wall_arr = np.empty(steps, dtype=np.int64)
    cdef double[::1] f_pt = f_pt_arr
    cdef double[::1] f_sol = f_sol_arr
    cdef double[::1] gxp = gxp_arr
    cdef double[:, ::1] grads = grads_arr
    cdef long long[::1] wall = wall_arr

    x_arr = np.empty(n)
    z_arr = np.empty(n)
    xh_arr = np.empty(n)
    xn_arr = np.empty(n)
    u_arr = np.empty(n)
    g_arr = np.empty(n)
    g2_arr = np.empty(n)
    zh_arr = np.empty(n)
    work_arr = np.empty(n)
    cdef double[::1] x = x_arr
    cdef double[::1] z = z_arr
    cdef double[::1] xh = xh_arr
    cdef double[::1] xn = xn_arr
    cdef double[::1] u = u_arr
    cdef double[::1] g = g_arr
    cdef double[::1] g2 = g2_arr
    cdef double[::1] zh = zh_arr
    cdef double[::1] work = work_arr

    cdef double a, A_new, r_old, r_new, fx, fsol
    cdef double acc = 0.0
    cdef long long t_prev = _now_ns(), t_now

    for i in range(n):
        x[i] = x0[i]
        xh[i] = x0[i]
        if geometry == GEOM_EUCLIDEAN:
            z[i] = sigma * x0[i]
        else:
            z[i] = sigma * (log(x0[i]) + 1.0)

    for k in range(steps):
        a = weights[k]
        A_new = acc + a
        r_old = acc / A_new
        r_new = a / A_new

        if method == METHOD_AXGD:
            _mirror(geometry, sigma, z, u, n)
            for i in range(n):
                xh[i] = r_old * x[i] + r_new * u[i]
            _matvec(A_mat, xh, g, n)
            for i in range(n):
                g[i] -= b[i]
                if use_noise:
                    g[i] += noise[2 * k, i]
                zh[i] = z[i] - a * g[i]
            _mirror(geometry, sigma, zh, u, n)
            for i in range(n):
                xn[i] = r_old * x[i] + r_new * u[i]
            _matvec(A_mat, xn, g, n)
            fx = 0.5 * _dot(xn, g, n) - _dot(b, xn, n)
            for i in range(n):
                g[i] -= b[i]
                if use_noise:
                    g[i] += noise[2 * k + 1, i]
                z[i] = z[i] - a * g[i]
                x[i] = xn[i]
            fsol = fx
        elif method == METHOD_AGD:
            _mirror(geometry, sigma, z, u, n)
            for i in range(n):
                xn[i] = r_old * xh[i] + r_new * u[i]
            _matvec(A_mat, xn, g, n)
            fx = 0.5 * _dot(xn, g, n) - _dot(b, xn, n)
            for i in range(n):
                g[i] -= b[i]
                g2[i] = g[i]
                if use_noise:
                    g[i] += noise[2 * k, i]
                    g2[i] += noise[2 * k + 1, i]
                z[i] = z[i] - a * g[i]
                work[i] = xn[i] - g2[i] / L
                x[i] = xn[i]
            if geometry == GEOM_ENTROPY:
                for i in range(n):
                    g2[i] = work[i]
                _project_simplex(g2, xh, work, n)
            else:
                for i in range(n):
                    xh[i] = work[i]
            _matvec(A_mat, xh, g2, n)
            fsol = 0.5 * _dot(xh, g2, n) - _dot(b, xh, n)
        else:
            _matvec(A_mat, x, g, n)
            fx = 0.5 * _dot(x, g, n) - _dot(b, x, n)
            for i in range(n):
                g[i] -= b[i]
                if use_noise:
                    g[i] += noise[k, i]
                g2[i] = x[i] - g[i] / L
            if geometry == GEOM_ENTROPY:
                _project_simplex(g2, xn, work, n)
            else:
                for i in range(n):
                    xn[i] = g2[i]
            _matvec(A_mat, xn, g2, n)
            fsol = 0.5 * _dot(xn, g2, n) - _dot(b, xn, n)
            gxp[k] = _dot(g, x, n)
            for i in range(n):
                grads[k, i] = g[i]
                x[i] = xn[i]

        if method != METHOD_GD:
            gxp[k] = _dot(g, x, n)
            for i in range(n):
                grads[k, i] = g[i]
        f_pt[k] = fx
        f_sol[k] = fsol
        acc = A_new
        t_now = _now_ns()
        wall[k] = t_now - t_prev
        t_prev = t_now

    return f_pt_arr, f_sol_arr, gxp_arr, grads_arr, wall_arr
