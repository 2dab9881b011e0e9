#include "pdechain/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "pdechain/errors.hpp"
#include "pdechain/expr.hpp"

namespace pdechain::pde {

namespace {

expr::Expr compile(const std::string& text, const char* what) {
    try {
        return expr::Expr::parse(text);
    } catch (const Error& e) {
        throw Error(ErrorCode::invalid_input, std::string(what) + ": " + e.what());
    }
}

double eval_xt(const expr::Expr& e, double x, double t) {
    expr::Bindings b;
    b.x = x;
    b.t = t;
    return e.eval(b);
}

double eval_xy(const expr::Expr& e, double x, double y) {
    expr::Bindings b;
    b.x = x;
    b.y = y;
    b.t = 0.0;
    return e.eval(b);
}

struct SideBc {
    bool dirichlet = true;
    expr::Expr value;
};

// Resolves the boundary condition applying to one end of a 1-D interval;
// `location: all` covers both ends.
std::optional<SideBc> side_bc(const Problem& p, const std::string& side) {
    for (const auto& bc : p.bcs) {
        if (bc.location != side && bc.location != "all") continue;
        SideBc out;
        out.dirichlet = bc.btype == "dirichlet";
        out.value = compile(bc.value, "boundary condition");
        return out;
    }
    return std::nullopt;
}

double coefficient(const Problem& p, const std::string& name) {
    auto it = p.pde.coefficients.find(name);
    if (it == p.pde.coefficients.end())
        throw Error(ErrorCode::invalid_input, "category '" + p.pde.category +
                                                  "' requires coefficient '" + name + "'");
    return it->second;
}

struct TimeSetup {
    std::vector<double> x;
    double dx = 0.0;
    double t0 = 0.0;
    double t1 = 0.0;
    int nt = 0;
    double dt = 0.0;
    std::vector<double> u0;
    SideBc left, right;
};

// Shared validation and grid setup for the 1-D time-dependent categories.
// `speed` scales the default time step so explicit schemes start on their
// stability boundary (dt = dx / speed).
TimeSetup time_setup(const Problem& p, const SolverSettings& s, double speed) {
    if (p.domain.is_2d())
        throw Error(ErrorCode::invalid_input,
                    "category '" + p.pde.category + "' supports interval domains only");
    if (!p.time)
        throw Error(ErrorCode::invalid_input,
                    "category '" + p.pde.category + "' needs a time domain");
    if (!p.ic)
        throw Error(ErrorCode::invalid_input,
                    "category '" + p.pde.category + "' needs an initial condition");
    if (s.nx < 3) throw Error(ErrorCode::invalid_input, "solver needs nx >= 3");

    auto left = side_bc(p, "left");
    auto right = side_bc(p, "right");
    if (!left || !right)
        throw Error(ErrorCode::invalid_input,
                    "category '" + p.pde.category + "' needs boundary conditions on both ends");

    TimeSetup ts;
    ts.dx = (p.domain.xmax - p.domain.xmin) / (s.nx - 1);
    ts.x.resize(static_cast<std::size_t>(s.nx));
    for (int i = 0; i < s.nx; ++i) ts.x[i] = p.domain.xmin + i * ts.dx;
    ts.t0 = p.time->t0;
    ts.t1 = p.time->t1;
    double horizon = ts.t1 - ts.t0;
    if (horizon <= 0.0) throw Error(ErrorCode::invalid_input, "time domain must have t1 > t0");
    ts.nt = s.nt ? *s.nt : static_cast<int>(std::ceil(horizon * speed / ts.dx));
    if (ts.nt < 1) ts.nt = 1;
    ts.dt = horizon / ts.nt;

    expr::Expr ic = compile(p.ic->value, "initial condition");
    ts.u0.resize(ts.x.size());
    for (std::size_t i = 0; i < ts.x.size(); ++i) ts.u0[i] = eval_xt(ic, ts.x[i], ts.t0);
    ts.left = *left;
    ts.right = *right;
    return ts;
}

void require_finite(const std::vector<double>& u, const std::string& category) {
    for (double v : u)
        if (!std::isfinite(v))
            throw Error(ErrorCode::numeric_domain,
                        "solve(" + category + "): solution contains non-finite values");
}

Solution heat_like(const Problem& p, const SolverSettings& s, double reaction_rate) {
    TimeSetup ts = time_setup(p, s, 1.0);
    double alpha = coefficient(p, "alpha");
    if (alpha <= 0.0) throw Error(ErrorCode::invalid_input, "diffusivity alpha must be positive");

    std::optional<expr::Expr> source;
    if (p.pde.source) source = compile(*p.pde.source, "source term");

    const int n = static_cast<int>(ts.x.size());
    const double r = alpha * ts.dt / (ts.dx * ts.dx);
    const bool explicit_scheme = s.scheme == "explicit";
    if (explicit_scheme && r > 0.5)
        throw Error(ErrorCode::stability,
                    "explicit heat scheme unstable: alpha*dt/dx^2 = " + format_double(r) +
                        " > 0.5; use dt <= " + format_double(0.5 * ts.dx * ts.dx / alpha));

    std::vector<double> u = ts.u0;
    std::vector<double> lower(n), diag(n), upper(n), rhs(n);
    for (int step = 0; step < ts.nt; ++step) {
        double t_new = ts.t0 + (step + 1) * ts.dt;
        double t_half = ts.t0 + (step + 0.5) * ts.dt;

        if (explicit_scheme) {
            std::vector<double> next(u.size());
            for (int i = 1; i + 1 < n; ++i) {
                double lap = u[i + 1] - 2.0 * u[i] + u[i - 1];
                double src = source ? eval_xt(*source, ts.x[i], t_half) : 0.0;
                next[i] = u[i] + r * lap + ts.dt * (reaction_rate * u[i] + src);
            }
            next[0] = ts.left.dirichlet
                          ? eval_xt(ts.left.value, ts.x[0], t_new)
                          : next[1] - ts.dx * eval_xt(ts.left.value, ts.x[0], t_new);
            next[n - 1] = ts.right.dirichlet
                              ? eval_xt(ts.right.value, ts.x[n - 1], t_new)
                              : next[n - 2] + ts.dx * eval_xt(ts.right.value, ts.x[n - 1], t_new);
            u = std::move(next);
            continue;
        }

        // Crank-Nicolson: (I - r/2 D) u' = (I + r/2 D) u + dt*(k*u + s(t_half)),
        // reaction explicit, boundary rows per condition type. Neumann uses the
        // reflected-ghost flux form, which conserves the trapezoid integral.
        for (int i = 1; i + 1 < n; ++i) {
            lower[i] = -0.5 * r;
            diag[i] = 1.0 + r;
            upper[i] = -0.5 * r;
            double lap = u[i + 1] - 2.0 * u[i] + u[i - 1];
            double src = source ? eval_xt(*source, ts.x[i], t_half) : 0.0;
            rhs[i] = u[i] + 0.5 * r * lap + ts.dt * (reaction_rate * u[i] + src);
        }
        if (ts.left.dirichlet) {
            diag[0] = 1.0;
            upper[0] = 0.0;
            rhs[0] = eval_xt(ts.left.value, ts.x[0], t_new);
        } else {
            double g_old = eval_xt(ts.left.value, ts.x[0], ts.t0 + step * ts.dt);
            double g_new = eval_xt(ts.left.value, ts.x[0], t_new);
            diag[0] = 1.0 + r;
            upper[0] = -r;
            double src = source ? eval_xt(*source, ts.x[0], t_half) : 0.0;
            rhs[0] = u[0] + r * (u[1] - u[0] - ts.dx * g_old) - r * ts.dx * g_new +
                     ts.dt * (reaction_rate * u[0] + src);
        }
        if (ts.right.dirichlet) {
            diag[n - 1] = 1.0;
            lower[n - 1] = 0.0;
            rhs[n - 1] = eval_xt(ts.right.value, ts.x[n - 1], t_new);
        } else {
            double g_old = eval_xt(ts.right.value, ts.x[n - 1], ts.t0 + step * ts.dt);
            double g_new = eval_xt(ts.right.value, ts.x[n - 1], t_new);
            diag[n - 1] = 1.0 + r;
            lower[n - 1] = -r;
            double src = source ? eval_xt(*source, ts.x[n - 1], t_half) : 0.0;
            rhs[n - 1] = u[n - 1] + r * (u[n - 2] - u[n - 1] + ts.dx * g_old) +
                         r * ts.dx * g_new + ts.dt * (reaction_rate * u[n - 1] + src);
        }
        u = thomas_solve(lower, diag, upper, rhs);
    }
    require_finite(u, p.pde.category);

    Solution sol;
    sol.category = p.pde.category;
    sol.x = ts.x;
    sol.u = std::move(u);
    sol.t_final = ts.t1;
    sol.time_dependent = true;
    sol.meta["scheme"] = explicit_scheme ? "ftcs" : "crank_nicolson";
    sol.meta["steps"] = ts.nt;
    sol.meta["dx"] = ts.dx;
    sol.meta["dt"] = ts.dt;
    sol.meta["r"] = r;
    return sol;
}

Solution wave_solution(const Problem& p, const SolverSettings& s) {
    if (p.pde.source)
        throw Error(ErrorCode::invalid_input, "wave category does not support a source term");
    double c = coefficient(p, "c");
    if (c <= 0.0) throw Error(ErrorCode::invalid_input, "wave speed c must be positive");
    TimeSetup ts = time_setup(p, s, c);
    if (!ts.left.dirichlet || !ts.right.dirichlet)
        throw Error(ErrorCode::invalid_input, "wave category supports dirichlet boundaries only");
    if (s.scheme == "implicit")
        throw Error(ErrorCode::invalid_input, "no implicit wave scheme is available");

    const double lambda = c * ts.dt / ts.dx;
    if (lambda > 1.0 + 1e-12)
        throw Error(ErrorCode::stability,
                    "CFL violated: c*dt/dx = " + format_double(lambda) +
                        " > 1; use dt <= " + format_double(ts.dx / c));
    const double lambda2 = lambda * lambda;
    const int n = static_cast<int>(ts.x.size());

    expr::Expr velocity = compile(p.ic->velocity ? *p.ic->velocity : std::string("0"),
                                  "initial velocity");

    // Taylor first step, then the symmetric two-level kernel.
    std::vector<double> prev = ts.u0;
    std::vector<double> cur(prev.size());
    for (int i = 1; i + 1 < n; ++i) {
        double lap = prev[i + 1] - 2.0 * prev[i] + prev[i - 1];
        cur[i] = prev[i] + ts.dt * eval_xt(velocity, ts.x[i], ts.t0) + 0.5 * lambda2 * lap;
    }
    cur[0] = eval_xt(ts.left.value, ts.x[0], ts.t0 + ts.dt);
    cur[n - 1] = eval_xt(ts.right.value, ts.x[n - 1], ts.t0 + ts.dt);

    for (int step = 2; step <= ts.nt; ++step) {
        double t_new = ts.t0 + step * ts.dt;
        std::vector<double> next =
            leapfrog_step(prev, cur, lambda2, eval_xt(ts.left.value, ts.x[0], t_new),
                          eval_xt(ts.right.value, ts.x[n - 1], t_new));
        prev = std::move(cur);
        cur = std::move(next);
    }
    require_finite(cur, p.pde.category);

    Solution sol;
    sol.category = p.pde.category;
    sol.x = ts.x;
    sol.u = std::move(cur);
    sol.t_final = ts.t1;
    sol.time_dependent = true;
    sol.meta["scheme"] = "leapfrog";
    sol.meta["steps"] = ts.nt;
    sol.meta["dx"] = ts.dx;
    sol.meta["dt"] = ts.dt;
    sol.meta["lambda"] = lambda;
    return sol;
}

Solution advection_solution(const Problem& p, const SolverSettings& s) {
    if (p.pde.source)
        throw Error(ErrorCode::invalid_input, "advection category does not support a source term");
    double a = coefficient(p, "a");
    if (a == 0.0) throw Error(ErrorCode::invalid_input, "advection speed a must be nonzero");
    TimeSetup ts = time_setup(p, s, std::abs(a));
    if (s.scheme == "implicit")
        throw Error(ErrorCode::invalid_input, "no implicit advection scheme is available");

    const double nu = std::abs(a) * ts.dt / ts.dx;
    if (nu > 1.0 + 1e-12)
        throw Error(ErrorCode::stability,
                    "CFL violated: |a|*dt/dx = " + format_double(nu) +
                        " > 1; use dt <= " + format_double(ts.dx / std::abs(a)));

    const int n = static_cast<int>(ts.x.size());
    const SideBc& inflow = a > 0.0 ? ts.left : ts.right;
    if (!inflow.dirichlet)
        throw Error(ErrorCode::invalid_input,
                    "advection needs a dirichlet condition on the inflow boundary");

    std::vector<double> u = ts.u0;
    std::vector<double> next(u.size());
    for (int step = 0; step < ts.nt; ++step) {
        double t_new = ts.t0 + (step + 1) * ts.dt;
        if (a > 0.0) {
            next[0] = eval_xt(inflow.value, ts.x[0], t_new);
            for (int i = 1; i < n; ++i) next[i] = u[i] - nu * (u[i] - u[i - 1]);
        } else {
            next[n - 1] = eval_xt(inflow.value, ts.x[n - 1], t_new);
            for (int i = 0; i + 1 < n; ++i) next[i] = u[i] + nu * (u[i + 1] - u[i]);
        }
        u.swap(next);
    }
    require_finite(u, p.pde.category);

    Solution sol;
    sol.category = p.pde.category;
    sol.x = ts.x;
    sol.u = std::move(u);
    sol.t_final = ts.t1;
    sol.time_dependent = true;
    sol.meta["scheme"] = "upwind";
    sol.meta["steps"] = ts.nt;
    sol.meta["dx"] = ts.dx;
    sol.meta["dt"] = ts.dt;
    sol.meta["nu"] = nu;
    return sol;
}

Solution steady_solution(const Problem& p, const SolverSettings& s) {
    if (!p.domain.is_2d())
        throw Error(ErrorCode::invalid_input,
                    "category '" + p.pde.category + "' needs a rectangle domain");
    if (s.scheme == "explicit")
        throw Error(ErrorCode::invalid_input,
                    "no explicit scheme exists for steady problems");
    const BoundaryCondition* boundary = nullptr;
    for (const auto& bc : p.bcs)
        if (bc.location == "all" && bc.btype == "dirichlet") boundary = &bc;
    if (!boundary)
        throw Error(ErrorCode::invalid_input,
                    "category '" + p.pde.category +
                        "' needs a dirichlet boundary condition with location 'all'");

    bool poisson = p.pde.category == "poisson";
    if (poisson && !p.pde.source)
        throw Error(ErrorCode::invalid_input, "poisson needs a source term");

    const int nx = s.nx;
    const int ny = s.ny ? *s.ny : s.nx;
    if (nx < 3 || ny < 3) throw Error(ErrorCode::invalid_input, "solver needs nx, ny >= 3");

    const double dx = (p.domain.xmax - p.domain.xmin) / (nx - 1);
    const double dy = (p.domain.ymax - p.domain.ymin) / (ny - 1);
    std::vector<double> xs(nx), ys(ny);
    for (int i = 0; i < nx; ++i) xs[i] = p.domain.xmin + i * dx;
    for (int j = 0; j < ny; ++j) ys[j] = p.domain.ymin + j * dy;

    expr::Expr g = compile(boundary->value, "boundary condition");
    std::optional<expr::Expr> source;
    if (poisson) source = compile(*p.pde.source, "source term");

    auto idx = [nx](int i, int j) { return static_cast<std::size_t>(j) * nx + i; };
    std::vector<double> u(static_cast<std::size_t>(nx) * ny, 0.0);
    std::vector<double> f(u.size(), 0.0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            bool edge = i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
            if (edge) u[idx(i, j)] = eval_xy(g, xs[i], ys[j]);
            if (source) f[idx(i, j)] = eval_xy(*source, xs[i], ys[j]);
        }

    // Gauss-Seidel sweeps with successive over-relaxation on u_xx + u_yy = f.
    const double omega = 1.5;
    const double cx = 1.0 / (dx * dx), cy = 1.0 / (dy * dy);
    const double center = 2.0 * (cx + cy);
    const double tol = 1e-8;
    const int max_sweeps = 50000;
    int sweeps = 0;
    double residual = 0.0;
    for (; sweeps < max_sweeps; ++sweeps) {
        for (int j = 1; j + 1 < ny; ++j)
            for (int i = 1; i + 1 < nx; ++i) {
                double gs = (cx * (u[idx(i + 1, j)] + u[idx(i - 1, j)]) +
                             cy * (u[idx(i, j + 1)] + u[idx(i, j - 1)]) - f[idx(i, j)]) /
                            center;
                u[idx(i, j)] += omega * (gs - u[idx(i, j)]);
            }
        residual = 0.0;
        for (int j = 1; j + 1 < ny; ++j)
            for (int i = 1; i + 1 < nx; ++i) {
                double lap = cx * (u[idx(i + 1, j)] - 2.0 * u[idx(i, j)] + u[idx(i - 1, j)]) +
                             cy * (u[idx(i, j + 1)] - 2.0 * u[idx(i, j)] + u[idx(i, j - 1)]);
                residual = std::max(residual, std::abs(lap - f[idx(i, j)]));
            }
        if (residual < tol) break;
    }
    if (residual >= tol)
        throw Error(ErrorCode::non_convergence,
                    "solve(" + p.pde.category + "): residual " + format_double(residual) +
                        " after " + std::to_string(max_sweeps) + " sweeps (tolerance 1e-8)");
    require_finite(u, p.pde.category);

    Solution sol;
    sol.category = p.pde.category;
    sol.x = xs;
    sol.y = ys;
    sol.u = std::move(u);
    sol.time_dependent = false;
    sol.meta["scheme"] = "gauss_seidel_sor";
    sol.meta["omega"] = omega;
    sol.meta["sweeps"] = sweeps + 1;
    sol.meta["residual"] = residual;
    sol.meta["dx"] = dx;
    sol.meta["dy"] = dy;
    return sol;
}

}  // namespace

std::vector<double> thomas_solve(std::vector<double> lower, std::vector<double> diag,
                                 std::vector<double> upper, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0 || lower.size() != n || upper.size() != n || rhs.size() != n)
        throw Error(ErrorCode::invalid_input, "thomas_solve: inconsistent band sizes");
    for (std::size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0)
            throw Error(ErrorCode::numeric_domain, "thomas_solve: zero pivot");
        double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0) throw Error(ErrorCode::numeric_domain, "thomas_solve: zero pivot");
    std::vector<double> u(n);
    u[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) u[i] = (rhs[i] - upper[i] * u[i + 1]) / diag[i];
    return u;
}

std::vector<double> leapfrog_step(const std::vector<double>& prev, const std::vector<double>& cur,
                                  double lambda2, double left, double right) {
    const std::size_t n = cur.size();
    if (prev.size() != n || n < 3)
        throw Error(ErrorCode::invalid_input, "leapfrog_step: inconsistent grid sizes");
    std::vector<double> next(n);
    next[0] = left;
    next[n - 1] = right;
    for (std::size_t i = 1; i + 1 < n; ++i)
        next[i] = 2.0 * cur[i] - prev[i] + lambda2 * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]);
    return next;
}

Solution solve_kernel(const Problem& problem, const SolverSettings& settings) {
    const std::string& cat = problem.pde.category;
    if (cat == "heat") return heat_like(problem, settings, 0.0);
    if (cat == "diffusion_reaction") {
        double k = coefficient(problem, "k");
        return heat_like(problem, settings, k);
    }
    if (cat == "wave") return wave_solution(problem, settings);
    if (cat == "advection") return advection_solution(problem, settings);
    if (cat == "laplace" || cat == "poisson") return steady_solution(problem, settings);
    throw Error(ErrorCode::invalid_input, "unsupported PDE category '" + cat + "'");
}

}  // namespace pdechain::pde
