#!/usr/bin/env python3
"""Regenerates the benchmark packs under packs/.

Each case document carries the natural-language task, the reference tool graph,
reference invocation texts, an optional numeric check, and a replay script for
the scripted provider. Scripts list one response per (role, step); the replay
provider hands them out in call order, so the step layout below mirrors the
exact provider-call sequence of the engine (planner first, one parser call per
parameter extraction, orchestrator calls for checkpoint directives and the
final answer).
"""

import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
PACKS = ROOT / "packs"

# Artifact kind produced by each tool; mirrors the registry. Handles are
# named <kind>:<per-kind counter>, matching the resource pool.
TOOL_KIND = {
    "define_geometry": "domain",
    "define_time_domain": "timedomain",
    "define_pde": "pde",
    "define_boundary_condition": "bc",
    "define_initial_condition": "ic",
    "assemble_problem": "problem",
    "configure_solver": "solver",
    "solve": "solution",
    "evaluate_solution": "values",
    "compute_error": "real",
    "export_solution": "file",
}


def compact(obj):
    return json.dumps(obj, separators=(",", ":"))


def handle_tokens(value):
    # Comma-separated, trimmed; mirrors the graph builder's splitting.
    return [t.strip() for t in value.split(",") if t.strip()]


def pattern_graph(steps):
    """Builds the reference graph for a clean execution of `steps`.

    Reproduces the execution-graph construction rules: one node per action,
    a data edge from the producer of every handle referenced in the params,
    and an order edge from the sequence predecessor when no data edge links
    the two.
    """
    counters = {}
    producer = {}
    nodes = []
    edges = []
    for seq, (tool, params) in enumerate(steps, start=1):
        nid = f"p{seq}"
        prev = f"p{seq - 1}" if seq > 1 else None
        data_from_prev = False
        for value in params.values():
            if not isinstance(value, str):
                continue
            for tok in handle_tokens(value):
                src = producer.get(tok)
                if src is None:
                    continue
                edges.append({"src": src, "dst": nid, "dep_kind": "data"})
                if src == prev:
                    data_from_prev = True
        if prev and not data_from_prev:
            edges.append({"src": prev, "dst": nid, "dep_kind": "order"})
        nodes.append({"id": nid, "role": tool, "kind": "tool", "seq": seq})
        kind = TOOL_KIND[tool]
        counters[kind] = counters.get(kind, 0) + 1
        producer[f"{kind}:{counters[kind]}"] = nid
    return {"nodes": nodes, "edges": edges}


def script_doc(name, planner, parser, orchestrator):
    steps = []
    for i, resp in enumerate(planner):
        steps.append({"role": "planner", "step": i, "response": resp})
    for i, params in enumerate(parser):
        steps.append({"role": "parser", "step": i, "response": {"params": params}})
    for i, resp in enumerate(orchestrator):
        steps.append({"role": "orchestrator", "step": i, "response": resp})
    return {"name": name, "steps": steps}


def plan_record(subtasks):
    return {"subtasks": [{"k": k, "tool": tool, "goal": goal} for k, tool, goal in subtasks]}


def case_doc(cid, category, text, pattern_steps, expected, numeric=None):
    doc = {
        "id": cid,
        "category": category,
        "nl_description": text,
        "pattern_graph": pattern_graph(pattern_steps),
        "expected_invocations": [
            {"tool": tool, "params": compact(params), "output": output}
            for tool, params, output in expected
        ],
    }
    if numeric:
        doc["numeric_check"] = numeric
    doc["script"] = f"scripts/{cid}.json"
    return doc


def simple_case(cid, category, text, steps, numeric, answer):
    """Fault-free case: plan ids 1..N, one parser step per subtask, one answer."""
    plan = [(i + 1, tool, goal) for i, (tool, goal, _, _) in enumerate(steps)]
    parser = [params for _, _, params, _ in steps]
    pattern_steps = [(tool, params) for tool, _, params, _ in steps]
    expected = [(tool, params, output) for tool, _, params, output in steps]
    doc = case_doc(cid, category, text, pattern_steps, expected, numeric)
    script = script_doc(cid, [plan_record(plan)], parser, [{"answer": answer}])
    return doc, script


GEO_UNIT = {"kind": "interval", "xmin": 0.0, "xmax": 1.0}
GEO_SQUARE = {"kind": "rectangle", "xmin": 0.0, "xmax": 1.0, "ymin": 0.0, "ymax": 1.0}
BC_ZERO = {"btype": "dirichlet", "location": "all", "value": "0"}
ASM_EVOLUTION = {
    "domain": "domain:1",
    "timedomain": "timedomain:1",
    "pde": "pde:1",
    "bcs": "bc:1",
    "ic": "ic:1",
}
ASM_STEADY = {"domain": "domain:1", "pde": "pde:1", "bcs": "bc:1"}


def evolution_steps(t1, pde_params, pde_output, ic_params, ic_output, solve_params,
                    solve_output, err_params, err_output, cfg=None, cfg_output=None):
    steps = [
        ("define_geometry", "set up the unit interval", GEO_UNIT, "interval domain [0, 1]"),
        ("define_time_domain", f"evolve from t=0 to t={t1}", {"t0": 0.0, "t1": t1},
         f"time domain [0, {t1}]"),
        ("define_pde", "declare the equation", pde_params, pde_output),
        ("define_boundary_condition", "hold both ends at zero", BC_ZERO,
         "dirichlet condition at all: 0"),
        ("define_initial_condition", "set the starting profile", ic_params, ic_output),
        ("assemble_problem", "combine the pieces into a problem", ASM_EVOLUTION,
         f"assembled {pde_params['category']} problem with 1 boundary condition"),
    ]
    if cfg is not None:
        steps.append(("configure_solver", "pick the grid and scheme", cfg, cfg_output))
    steps.append(("solve", "run the time stepper", solve_params, solve_output))
    steps.append(("compute_error", "compare against the analytic solution", err_params,
                  err_output))
    return steps


def steady_steps(pde_params, pde_output, bc_value, cfg, solve_output, err_params,
                 err_output, extra=None):
    steps = [
        ("define_geometry", "set up the unit square", GEO_SQUARE,
         "rectangle domain [0, 1] x [0, 1]"),
        ("define_pde", "declare the equation", pde_params, pde_output),
        ("define_boundary_condition", "fix the boundary values",
         {"btype": "dirichlet", "location": "all", "value": bc_value},
         f"dirichlet condition at all: {bc_value}"),
        ("assemble_problem", "combine the pieces into a problem", ASM_STEADY,
         f"assembled {pde_params['category']} problem with 1 boundary condition"),
        ("configure_solver", "pick the grid", cfg,
         f"solver settings: nx={cfg['nx']}, ny={cfg['ny']}, scheme=auto"),
        ("solve", "relax to the steady state", {"problem": "problem:1", "solver": "solver:1"},
         solve_output),
    ]
    if extra:
        steps.extend(extra)
    steps.append(("compute_error", "compare against the exact field", err_params, err_output))
    return steps


def main_cases():
    cases = []

    cases.append(simple_case(
        "heat_01", "Heat",
        "Solve the 1-D heat equation u_t = u_xx on the unit interval with homogeneous "
        "Dirichlet boundaries and initial profile sin(pi*x), then report the L2 error "
        "against the analytic decay at t = 0.1.",
        evolution_steps(
            0.1,
            {"category": "heat", "alpha": 1.0, "domain": "domain:1"},
            "heat equation with alpha=1",
            {"value": "sin(pi*x)"}, "initial condition sin(pi*x)",
            {"problem": "problem:1"},
            "solved heat on 101 points, 10 steps (crank_nicolson)",
            {"solution": "solution:1", "reference": "exp(-pi^2*t)*sin(pi*x)", "norm": "l2"},
            "l2 error 0.0002 against reference"),
        {"reference": "exp(-pi^2*t)*sin(pi*x)", "norm": "l2", "threshold": 0.001},
        "The sine mode decays by exp(-pi^2 t). Crank-Nicolson on 101 grid points "
        "reproduces exp(-pi^2*0.1)*sin(pi*x) at t = 0.1 with an L2 error of about "
        "2e-4, well inside the 1e-3 tolerance."))

    cases.append(simple_case(
        "heat_02", "Heat",
        "Evolve the second sine mode sin(2*pi*x) under the 1-D heat equation to t = 0.05 "
        "on a 101-point grid with 50 implicit steps and check the L2 error against the "
        "analytic decay.",
        evolution_steps(
            0.05,
            {"category": "heat", "alpha": 1.0, "domain": "domain:1"},
            "heat equation with alpha=1",
            {"value": "sin(2*pi*x)"}, "initial condition sin(2*pi*x)",
            {"problem": "problem:1", "solver": "solver:1"},
            "solved heat on 101 points, 50 steps (crank_nicolson)",
            {"solution": "solution:1", "reference": "exp(-4*pi^2*t)*sin(2*pi*x)",
             "norm": "l2"},
            "l2 error 0.0001 against reference",
            cfg={"nx": 101, "nt": 50, "scheme": "implicit"},
            cfg_output="solver settings: nx=101, nt=50, scheme=implicit"),
        {"reference": "exp(-4*pi^2*t)*sin(2*pi*x)", "norm": "l2", "threshold": 0.001},
        "With 50 Crank-Nicolson steps the second mode decays to "
        "exp(-4*pi^2*0.05)*sin(2*pi*x); the computed L2 error stays near 1e-4."))

    cases.append(simple_case(
        "diffusion_01", "Diffusion",
        "A diffusion problem with diffusivity 0.5 on the unit interval: start from "
        "sin(pi*x), hold the ends at zero, evolve to t = 0.1, and measure the L2 "
        "deviation from the analytic decay.",
        evolution_steps(
            0.1,
            {"category": "heat", "alpha": 0.5, "domain": "domain:1"},
            "heat equation with alpha=0.5",
            {"value": "sin(pi*x)"}, "initial condition sin(pi*x)",
            {"problem": "problem:1"},
            "solved heat on 101 points, 10 steps (crank_nicolson)",
            {"solution": "solution:1", "reference": "exp(-0.5*pi^2*t)*sin(pi*x)",
             "norm": "l2"},
            "l2 error 0.0001 against reference"),
        {"reference": "exp(-0.5*pi^2*t)*sin(pi*x)", "norm": "l2", "threshold": 0.001},
        "The profile decays by exp(-0.5*pi^2 t); the Crank-Nicolson run matches the "
        "analytic field at t = 0.1 to roughly 1e-4 in L2."))

    cases.append(simple_case(
        "diffreact_01", "Diffusion-Reaction",
        "Solve the diffusion-reaction equation u_t = u_xx - u on the unit interval with "
        "initial data sin(pi*x) and zero Dirichlet boundaries up to t = 0.05 using 50 "
        "time steps; verify the L2 error against the analytic decay.",
        evolution_steps(
            0.05,
            {"category": "diffusion_reaction", "alpha": 1.0, "k": -1.0,
             "domain": "domain:1"},
            "diffusion_reaction equation with alpha=1, k=-1",
            {"value": "sin(pi*x)"}, "initial condition sin(pi*x)",
            {"problem": "problem:1", "solver": "solver:1"},
            "solved diffusion_reaction on 101 points, 50 steps (crank_nicolson)",
            {"solution": "solution:1", "reference": "exp((-1-pi^2)*t)*sin(pi*x)",
             "norm": "l2"},
            "l2 error 0.0001 against reference",
            cfg={"nx": 101, "nt": 50, "scheme": "auto"},
            cfg_output="solver settings: nx=101, nt=50, scheme=auto"),
        {"reference": "exp((-1-pi^2)*t)*sin(pi*x)", "norm": "l2", "threshold": 0.001},
        "The linear sink adds a factor exp(-t) on top of the diffusive decay; with 50 "
        "steps the computed solution tracks exp((-1-pi^2)*t)*sin(pi*x) to about 1e-4."))

    cases.append(simple_case(
        "wave_01", "Wave",
        "Solve the wave equation u_tt = u_xx on the unit interval with u(x,0) = "
        "sin(pi*x), zero initial velocity, and fixed ends; evolve to t = 0.5 and report "
        "the L2 error against the standing-wave solution.",
        evolution_steps(
            0.5,
            {"category": "wave", "c": 1.0, "domain": "domain:1"},
            "wave equation with c=1",
            {"value": "sin(pi*x)", "velocity": "0"},
            "initial condition sin(pi*x), velocity 0",
            {"problem": "problem:1"},
            "solved wave on 101 points, 50 steps (leapfrog)",
            {"solution": "solution:1", "reference": "cos(pi*t)*sin(pi*x)", "norm": "l2"},
            "l2 error below 1e-12 against reference"),
        {"reference": "cos(pi*t)*sin(pi*x)", "norm": "l2", "threshold": 1e-06},
        "At unit Courant number the leapfrog scheme transports the standing wave "
        "exactly on the grid: the solution at t = 0.5 equals cos(pi*t)*sin(pi*x) to "
        "rounding error."))

    cases.append(simple_case(
        "wave_02", "Wave",
        "Propagate the second mode sin(2*pi*x) under u_tt = 4 u_xx (wave speed 2) to "
        "t = 0.25 with 50 leapfrog steps on 101 points and verify the standing-wave "
        "solution cos(4*pi*t)*sin(2*pi*x).",
        evolution_steps(
            0.25,
            {"category": "wave", "c": 2.0, "domain": "domain:1"},
            "wave equation with c=2",
            {"value": "sin(2*pi*x)", "velocity": "0"},
            "initial condition sin(2*pi*x), velocity 0",
            {"problem": "problem:1", "solver": "solver:1"},
            "solved wave on 101 points, 50 steps (leapfrog)",
            {"solution": "solution:1", "reference": "cos(4*pi*t)*sin(2*pi*x)",
             "norm": "l2"},
            "l2 error below 1e-12 against reference",
            cfg={"nx": 101, "nt": 50, "scheme": "auto"},
            cfg_output="solver settings: nx=101, nt=50, scheme=auto"),
        {"reference": "cos(4*pi*t)*sin(2*pi*x)", "norm": "l2", "threshold": 1e-06},
        "With c*dt/dx = 1 the leapfrog update is exact on the grid; the second mode "
        "oscillates as cos(4*pi*t)*sin(2*pi*x) with error at rounding level."))

    cases.append(simple_case(
        "advection_01", "Advection",
        "Advect the Gaussian pulse exp(-200*(x-0.3)^2) to the right with speed 1 on the "
        "unit interval until t = 0.3 (zero inflow) and measure the L2 error against the "
        "shifted pulse.",
        evolution_steps(
            0.3,
            {"category": "advection", "a": 1.0, "domain": "domain:1"},
            "advection equation with a=1",
            {"value": "exp(-200*(x-0.3)^2)"},
            "initial condition exp(-200*(x-0.3)^2)",
            {"problem": "problem:1"},
            "solved advection on 101 points, 30 steps (upwind)",
            {"solution": "solution:1", "reference": "exp(-200*(x-0.3-t)^2)", "norm": "l2"},
            "l2 error below 1e-8 against reference"),
        {"reference": "exp(-200*(x-0.3-t)^2)", "norm": "l2", "threshold": 1e-06},
        "At unit Courant number the upwind scheme shifts the profile one cell per step, "
        "so the pulse arrives centred at x = 0.6 with error at rounding level."))

    cases.append(simple_case(
        "advection_02", "Advection",
        "Transport the pulse exp(-200*(x-0.7)^2) to the left with speed -1 until "
        "t = 0.2, holding the right inflow at zero, and check the L2 error against the "
        "shifted profile.",
        evolution_steps(
            0.2,
            {"category": "advection", "a": -1.0, "domain": "domain:1"},
            "advection equation with a=-1",
            {"value": "exp(-200*(x-0.7)^2)"},
            "initial condition exp(-200*(x-0.7)^2)",
            {"problem": "problem:1"},
            "solved advection on 101 points, 20 steps (upwind)",
            {"solution": "solution:1", "reference": "exp(-200*(x-0.7+t)^2)", "norm": "l2"},
            "l2 error below 1e-8 against reference"),
        {"reference": "exp(-200*(x-0.7+t)^2)", "norm": "l2", "threshold": 1e-06},
        "The pulse moves left one cell per step at unit Courant number and lands "
        "centred at x = 0.5, matching exp(-200*(x-0.7+t)^2) to rounding error."))

    cases.append(simple_case(
        "laplace_01", "Laplace",
        "Solve Laplace's equation on the unit square with boundary values x+y and "
        "report the maximum deviation from the harmonic function x+y on a 41x41 grid.",
        steady_steps(
            {"category": "laplace", "domain": "domain:1"}, "laplace equation",
            "x+y", {"nx": 41, "ny": 41},
            "solved laplace on 41x41 grid (gauss_seidel_sor)",
            {"solution": "solution:1", "reference": "x+y", "norm": "linf"},
            "linf error below 1e-6 against reference"),
        {"reference": "x+y", "norm": "linf", "threshold": 0.0001},
        "x+y is harmonic and linear, so the five-point stencil reproduces it exactly; "
        "the relaxation residual bounds the max error far below 1e-4."))

    cases.append(simple_case(
        "laplace_02", "Laplace",
        "Solve Laplace's equation on the unit square with boundary data x^2-y^2, export "
        "the field to CSV, and verify the maximum error against the harmonic polynomial "
        "x^2-y^2.",
        steady_steps(
            {"category": "laplace", "domain": "domain:1"}, "laplace equation",
            "x^2-y^2", {"nx": 41, "ny": 41},
            "solved laplace on 41x41 grid (gauss_seidel_sor)",
            {"solution": "solution:1", "reference": "x^2-y^2", "norm": "linf"},
            "linf error below 1e-6 against reference",
            extra=[("export_solution", "write the grid to disk",
                    {"solution": "solution:1", "path": "laplace_02.csv"},
                    "exported 1681 rows to laplace_02.csv")]),
        {"reference": "x^2-y^2", "norm": "linf", "threshold": 0.0001},
        "The saddle x^2-y^2 is harmonic and quadratic, hence exact for the five-point "
        "stencil; the exported 41x41 field matches it to the relaxation tolerance."))

    cases.append(simple_case(
        "poisson_01", "Poisson",
        "Solve the Poisson problem u_xx + u_yy = 4 on the unit square with boundary "
        "values x^2+y^2 and report the maximum error against the exact paraboloid.",
        steady_steps(
            {"category": "poisson", "source": "4", "domain": "domain:1"},
            "poisson equation with source 4",
            "x^2+y^2", {"nx": 41, "ny": 41},
            "solved poisson on 41x41 grid (gauss_seidel_sor)",
            {"solution": "solution:1", "reference": "x^2+y^2", "norm": "linf"},
            "linf error below 1e-6 against reference"),
        {"reference": "x^2+y^2", "norm": "linf", "threshold": 0.0001},
        "x^2+y^2 has Laplacian 4 and no fourth derivatives, so the discrete solution "
        "agrees with the paraboloid up to the 1e-8 relaxation residual."))

    cases.append(simple_case(
        "poisson_02", "Poisson",
        "Solve u_xx + u_yy = 6x+6y on the unit square with boundary data x^3+y^3, "
        "probe the centre value, and verify the maximum error against x^3+y^3.",
        steady_steps(
            {"category": "poisson", "source": "6*x+6*y", "domain": "domain:1"},
            "poisson equation with source 6*x+6*y",
            "x^3+y^3", {"nx": 41, "ny": 41},
            "solved poisson on 41x41 grid (gauss_seidel_sor)",
            {"solution": "solution:1", "reference": "x^3+y^3", "norm": "linf"},
            "linf error below 1e-6 against reference",
            extra=[("evaluate_solution", "probe the centre of the square",
                    {"solution": "solution:1", "points": "0.5,0.5"},
                    "values: u(0.5,0.5)=0.25")]),
        {"reference": "x^3+y^3", "norm": "linf", "threshold": 0.0001},
        "Cubics are still exact for the five-point stencil; the centre probe returns "
        "0.25 and the field matches x^3+y^3 to the relaxation tolerance."))

    return cases


def fault_cases():
    """Each case plants one defect and scripts the recovery the engine requests.

    Parser steps are listed in consumption order: the plan's extractions first,
    then the re-extractions triggered by checkpoint directives (or by the
    revised plan), then the remaining subtasks.
    """
    cases = []

    # --- heat_f1: unstable explicit configuration, fixed by evict+redo -----
    plan = [
        (1, "define_geometry", "set up the unit interval"),
        (2, "define_time_domain", "evolve to t=0.1"),
        (3, "define_pde", "declare the heat equation"),
        (4, "define_boundary_condition", "hold both ends at zero"),
        (5, "define_initial_condition", "start from sin(pi*x)"),
        (6, "assemble_problem", "combine the pieces"),
        (7, "configure_solver", "pick the grid and scheme"),
        (8, "solve", "run the time stepper"),
        (9, "compute_error", "compare against the analytic decay"),
    ]
    pde = {"category": "heat", "alpha": 1.0, "domain": "domain:1"}
    ic = {"value": "sin(pi*x)"}
    cfg_bad = {"nx": 101, "nt": 2, "scheme": "explicit"}
    cfg_good = {"nx": 101, "nt": 10, "scheme": "implicit"}
    solve_1 = {"problem": "problem:1", "solver": "solver:1"}
    solve_2 = {"problem": "problem:1", "solver": "solver:2"}
    err = {"solution": "solution:1", "reference": "exp(-pi^2*t)*sin(pi*x)", "norm": "l2"}
    parser = [GEO_UNIT, {"t0": 0.0, "t1": 0.1}, pde, BC_ZERO, ic, ASM_EVOLUTION,
              cfg_bad, solve_1,          # solve fails: r = 500 with 2 explicit steps
              cfg_good, solve_2,         # re-extraction after evict+redo of the config
              err]
    orch = [
        {"action": "evict_redo", "k": 7, "node": "n7",
         "hint": "the explicit scheme needs alpha*dt/dx^2 <= 0.5; use more steps or the "
                 "implicit scheme"},
        {"answer": "The first configuration (2 explicit steps) violated the stability "
                   "bound, so the solver settings were rebuilt with 10 implicit steps; "
                   "the recomputed solution matches exp(-pi^2*t)*sin(pi*x) to about "
                   "2e-4 in L2."},
    ]
    pattern = [("define_geometry", GEO_UNIT),
               ("define_time_domain", {"t0": 0.0, "t1": 0.1}),
               ("define_pde", pde),
               ("define_boundary_condition", BC_ZERO),
               ("define_initial_condition", ic),
               ("assemble_problem", ASM_EVOLUTION),
               ("configure_solver", cfg_good),
               ("solve", solve_1),
               ("compute_error", err)]
    expected = [
        ("define_geometry", GEO_UNIT, "interval domain [0, 1]"),
        ("define_time_domain", {"t0": 0.0, "t1": 0.1}, "time domain [0, 0.1]"),
        ("define_pde", pde, "heat equation with alpha=1"),
        ("define_boundary_condition", BC_ZERO, "dirichlet condition at all: 0"),
        ("define_initial_condition", ic, "initial condition sin(pi*x)"),
        ("assemble_problem", ASM_EVOLUTION, "assembled heat problem with 1 boundary condition"),
        ("configure_solver", cfg_good, "solver settings: nx=101, nt=10, scheme=implicit"),
        ("solve", solve_2, "solved heat on 101 points, 10 steps (crank_nicolson)"),
        ("compute_error", err, "l2 error 0.0002 against reference"),
    ]
    doc = case_doc(
        "heat_f1", "Heat",
        "Solve the 1-D heat equation with initial profile sin(pi*x) to t = 0.1 and "
        "check the L2 error; the first solver configuration is too coarse for an "
        "explicit scheme and must be replaced.",
        pattern, expected,
        {"reference": "exp(-pi^2*t)*sin(pi*x)", "norm": "l2", "threshold": 0.001})
    cases.append((doc, script_doc("heat_f1", [plan_record(plan)], parser, orch)))

    # --- diffusion_f1: assembled without the initial condition -------------
    plan = [
        (1, "define_geometry", "set up the unit interval"),
        (2, "define_time_domain", "evolve to t=0.1"),
        (3, "define_pde", "declare diffusion with alpha=0.5"),
        (4, "define_boundary_condition", "hold both ends at zero"),
        (5, "define_initial_condition", "start from sin(pi*x)"),
        (6, "assemble_problem", "combine the pieces"),
        (7, "configure_solver", "pick the grid"),
        (8, "solve", "run the time stepper"),
        (9, "compute_error", "compare against the analytic decay"),
    ]
    pde = {"category": "heat", "alpha": 0.5, "domain": "domain:1"}
    asm_bad = {"domain": "domain:1", "timedomain": "timedomain:1", "pde": "pde:1",
               "bcs": "bc:1"}
    cfg = {"nx": 101, "nt": 10, "scheme": "auto"}
    solve_bad = {"problem": "problem:1", "solver": "solver:1"}
    solve_good = {"problem": "problem:2", "solver": "solver:1"}
    err = {"solution": "solution:1", "reference": "exp(-0.5*pi^2*t)*sin(pi*x)",
           "norm": "l2"}
    parser = [GEO_UNIT, {"t0": 0.0, "t1": 0.1}, pde, BC_ZERO, ic, asm_bad, cfg,
              solve_bad,                  # fails: evolution problem without an ic
              ASM_EVOLUTION, solve_good,  # re-assembled with the ic attached
              err]
    orch = [
        {"action": "evict_redo", "k": 6, "node": "n6",
         "hint": "the evolution problem must carry the initial condition ic:1"},
        {"answer": "The problem was first assembled without its initial condition, "
                   "which the solver rejected; after re-assembly with ic:1 the run "
                   "matches exp(-0.5*pi^2*t)*sin(pi*x) to about 1e-4 in L2."},
    ]
    pattern = [("define_geometry", GEO_UNIT),
               ("define_time_domain", {"t0": 0.0, "t1": 0.1}),
               ("define_pde", pde),
               ("define_boundary_condition", BC_ZERO),
               ("define_initial_condition", ic),
               ("assemble_problem", ASM_EVOLUTION),
               ("configure_solver", cfg),
               ("solve", solve_bad),
               ("compute_error", err)]
    expected = [
        ("define_geometry", GEO_UNIT, "interval domain [0, 1]"),
        ("define_time_domain", {"t0": 0.0, "t1": 0.1}, "time domain [0, 0.1]"),
        ("define_pde", pde, "heat equation with alpha=0.5"),
        ("define_boundary_condition", BC_ZERO, "dirichlet condition at all: 0"),
        ("define_initial_condition", ic, "initial condition sin(pi*x)"),
        ("configure_solver", cfg, "solver settings: nx=101, nt=10, scheme=auto"),
        ("assemble_problem", ASM_EVOLUTION,
         "assembled heat problem with 1 boundary condition"),
        ("solve", solve_good, "solved heat on 101 points, 10 steps (crank_nicolson)"),
        ("compute_error", err, "l2 error 0.0001 against reference"),
    ]
    doc = case_doc(
        "diffusion_f1", "Diffusion",
        "Diffusion with alpha = 0.5 on the unit interval from sin(pi*x) to t = 0.1; "
        "the problem is first assembled without its initial condition and must be "
        "rebuilt before the solve can proceed.",
        pattern, expected,
        {"reference": "exp(-0.5*pi^2*t)*sin(pi*x)", "norm": "l2", "threshold": 0.001})
    cases.append((doc, script_doc("diffusion_f1", [plan_record(plan)], parser, orch)))

    # --- poisson_f1: source term omitted at define time --------------------
    plan = [
        (1, "define_geometry", "set up the unit square"),
        (2, "define_pde", "declare the poisson equation"),
        (3, "define_boundary_condition", "fix the boundary values"),
        (4, "assemble_problem", "combine the pieces"),
        (5, "configure_solver", "pick the grid"),
        (6, "solve", "relax to the steady state"),
        (7, "evaluate_solution", "probe two interior points"),
        (8, "export_solution", "write the field to disk"),
        (9, "compute_error", "compare against the exact field"),
    ]
    pde_bad = {"category": "poisson", "domain": "domain:1"}
    pde_good = {"category": "poisson", "source": "4", "domain": "domain:1"}
    bc = {"btype": "dirichlet", "location": "all", "value": "x^2+y^2"}
    asm_1 = {"domain": "domain:1", "pde": "pde:1", "bcs": "bc:1"}
    asm_2 = {"domain": "domain:1", "pde": "pde:2", "bcs": "bc:1"}
    cfg = {"nx": 41, "ny": 41}
    solve_1 = {"problem": "problem:1", "solver": "solver:1"}
    solve_2 = {"problem": "problem:2", "solver": "solver:1"}
    eval_p = {"solution": "solution:1", "points": "0.25,0.25;0.5,0.5"}
    export_p = {"solution": "solution:1", "path": "poisson_f1.csv"}
    err = {"solution": "solution:1", "reference": "x^2+y^2", "norm": "linf"}
    parser = [GEO_SQUARE, pde_bad, bc, asm_1, cfg,
              solve_1,                     # fails: poisson needs a source term
              pde_good, asm_2, solve_2,    # redo chain after evicting the pde node
              eval_p, export_p, err]
    orch = [
        {"action": "evict_redo", "k": 2, "node": "n2",
         "hint": "poisson needs the forcing term; for u = x^2+y^2 the source is 4"},
        {"answer": "The equation was declared without its forcing term, so the solve "
                   "failed; after re-declaring poisson with source 4 and re-assembling, "
                   "the 41x41 field matches x^2+y^2 to the relaxation tolerance and the "
                   "centre probe reads 0.5."},
    ]
    pattern = [("define_geometry", GEO_SQUARE),
               ("define_pde", pde_good),
               ("define_boundary_condition", bc),
               ("assemble_problem", asm_1),
               ("configure_solver", cfg),
               ("solve", solve_1),
               ("evaluate_solution", eval_p),
               ("export_solution", export_p),
               ("compute_error", err)]
    expected = [
        ("define_geometry", GEO_SQUARE, "rectangle domain [0, 1] x [0, 1]"),
        ("define_boundary_condition", bc, "dirichlet condition at all: x^2+y^2"),
        ("configure_solver", cfg, "solver settings: nx=41, ny=41, scheme=auto"),
        ("define_pde", pde_good, "poisson equation with source 4"),
        ("assemble_problem", asm_2, "assembled poisson problem with 1 boundary condition"),
        ("solve", solve_2, "solved poisson on 41x41 grid (gauss_seidel_sor)"),
        ("evaluate_solution", eval_p, "values: u(0.25,0.25)=0.125 u(0.5,0.5)=0.5"),
        ("export_solution", export_p, "exported 1681 rows to poisson_f1.csv"),
        ("compute_error", err, "linf error below 1e-6 against reference"),
    ]
    doc = case_doc(
        "poisson_f1", "Poisson",
        "Solve u_xx + u_yy = 4 on the unit square with boundary values x^2+y^2, probe "
        "two points, export the grid, and check the max error; the equation is first "
        "declared without its source term.",
        pattern, expected,
        {"reference": "x^2+y^2", "norm": "linf", "threshold": 0.0001})
    cases.append((doc, script_doc("poisson_f1", [plan_record(plan)], parser, orch)))

    # --- advection_f1: reference written in the wrong variable -------------
    plan = [
        (1, "define_geometry", "set up the unit interval"),
        (2, "define_time_domain", "evolve to t=0.2"),
        (3, "define_pde", "declare advection with speed 1"),
        (4, "define_boundary_condition", "zero inflow"),
        (5, "define_initial_condition", "set the Gaussian pulse"),
        (6, "assemble_problem", "combine the pieces"),
        (7, "configure_solver", "pick the grid"),
        (8, "solve", "run the upwind stepper"),
        (9, "compute_error", "compare against the shifted pulse"),
    ]
    pde = {"category": "advection", "a": 1.0, "domain": "domain:1"}
    ic_adv = {"value": "exp(-200*(x-0.5)^2)"}
    cfg = {"nx": 101, "nt": 20, "scheme": "auto"}
    solve_p = {"problem": "problem:1", "solver": "solver:1"}
    err_bad = {"solution": "solution:1", "reference": "exp(-200*(y-0.7)^2)", "norm": "l2"}
    err_good = {"solution": "solution:1", "reference": "exp(-200*(x-0.5-t)^2)",
                "norm": "l2"}
    parser = [GEO_UNIT, {"t0": 0.0, "t1": 0.2}, pde, BC_ZERO, ic_adv, ASM_EVOLUTION,
              cfg, solve_p,
              err_bad,     # fails: y is not a variable of a 1-D solution
              err_good]    # re-extraction with the corrective hint
    orch = [
        {"action": "reparse", "k": 9,
         "hint": "the solution grid is one-dimensional in x; write the reference in x "
                 "and t, not y"},
        {"answer": "The first error check used y, which a 1-D solution does not bind; "
                   "rewritten as exp(-200*(x-0.5-t)^2) the comparison confirms the "
                   "pulse arrives centred at x = 0.7 with rounding-level error."},
    ]
    pattern = [("define_geometry", GEO_UNIT),
               ("define_time_domain", {"t0": 0.0, "t1": 0.2}),
               ("define_pde", pde),
               ("define_boundary_condition", BC_ZERO),
               ("define_initial_condition", ic_adv),
               ("assemble_problem", ASM_EVOLUTION),
               ("configure_solver", cfg),
               ("solve", solve_p),
               ("compute_error", err_good)]
    expected = [
        ("define_geometry", GEO_UNIT, "interval domain [0, 1]"),
        ("define_time_domain", {"t0": 0.0, "t1": 0.2}, "time domain [0, 0.2]"),
        ("define_pde", pde, "advection equation with a=1"),
        ("define_boundary_condition", BC_ZERO, "dirichlet condition at all: 0"),
        ("define_initial_condition", ic_adv, "initial condition exp(-200*(x-0.5)^2)"),
        ("assemble_problem", ASM_EVOLUTION,
         "assembled advection problem with 1 boundary condition"),
        ("configure_solver", cfg, "solver settings: nx=101, nt=20, scheme=auto"),
        ("solve", solve_p, "solved advection on 101 points, 20 steps (upwind)"),
        ("compute_error", err_good, "l2 error below 1e-8 against reference"),
    ]
    doc = case_doc(
        "advection_f1", "Advection",
        "Advect the pulse exp(-200*(x-0.5)^2) rightwards at speed 1 to t = 0.2 and "
        "measure the L2 error; the first reference expression is written in the wrong "
        "variable and must be re-extracted.",
        pattern, expected,
        {"reference": "exp(-200*(x-0.5-t)^2)", "norm": "l2", "threshold": 1e-06})
    cases.append((doc, script_doc("advection_f1", [plan_record(plan)], parser, orch)))

    # --- wave_f1: repeated instability, resolved by replanning -------------
    plan = [
        (1, "define_geometry", "set up the unit interval"),
        (2, "define_time_domain", "evolve to t=0.5"),
        (3, "define_pde", "declare the wave equation"),
        (4, "define_boundary_condition", "fix both ends"),
        (5, "define_initial_condition", "standing wave start"),
        (6, "assemble_problem", "combine the pieces"),
        (7, "configure_solver", "pick the grid"),
        (8, "solve", "run the leapfrog stepper"),
        (9, "compute_error", "compare against the standing wave"),
    ]
    replan = [
        (1, "define_geometry", "set up the unit interval"),
        (2, "define_time_domain", "evolve to t=0.5"),
        (3, "define_pde", "declare the wave equation"),
        (4, "define_boundary_condition", "fix both ends"),
        (5, "define_initial_condition", "standing wave start"),
        (6, "assemble_problem", "combine the pieces"),
        (10, "configure_solver", "pick a stable grid"),
        (11, "solve", "run the leapfrog stepper"),
        (12, "compute_error", "compare against the standing wave"),
    ]
    pde = {"category": "wave", "c": 1.0, "domain": "domain:1"}
    ic_wave = {"value": "sin(pi*x)", "velocity": "0"}
    cfg_bad = {"nx": 101, "nt": 20}      # c*dt/dx = 2.5: unstable however often retried
    cfg_good = {"nx": 101, "nt": 50, "scheme": "auto"}
    solve_1 = {"problem": "problem:1", "solver": "solver:1"}
    solve_2 = {"problem": "problem:1", "solver": "solver:2"}
    err = {"solution": "solution:1", "reference": "cos(pi*t)*sin(pi*x)", "norm": "l2"}
    parser = [GEO_UNIT, {"t0": 0.0, "t1": 0.5}, pde, BC_ZERO, ic_wave, ASM_EVOLUTION,
              cfg_bad, solve_1,
              cfg_good, solve_2, err]    # revised tail after the replan
    orch = [
        {"action": "retry", "k": 8},     # identical failure -> signature collapse
        {"answer": "The 20-step grid put the Courant number at 2.5 and the solve kept "
                   "failing, so the plan was revised with a 50-step configuration; at "
                   "unit Courant number the standing wave cos(pi*t)*sin(pi*x) is "
                   "reproduced to rounding error."},
    ]
    pattern = [("define_geometry", GEO_UNIT),
               ("define_time_domain", {"t0": 0.0, "t1": 0.5}),
               ("define_pde", pde),
               ("define_boundary_condition", BC_ZERO),
               ("define_initial_condition", ic_wave),
               ("assemble_problem", ASM_EVOLUTION),
               ("configure_solver", cfg_good),
               ("solve", solve_1),
               ("compute_error", err)]
    expected = [
        ("define_geometry", GEO_UNIT, "interval domain [0, 1]"),
        ("define_time_domain", {"t0": 0.0, "t1": 0.5}, "time domain [0, 0.5]"),
        ("define_pde", pde, "wave equation with c=1"),
        ("define_boundary_condition", BC_ZERO, "dirichlet condition at all: 0"),
        ("define_initial_condition", ic_wave, "initial condition sin(pi*x), velocity 0"),
        ("assemble_problem", ASM_EVOLUTION,
         "assembled wave problem with 1 boundary condition"),
        ("configure_solver", cfg_good, "solver settings: nx=101, nt=50, scheme=auto"),
        ("solve", solve_2, "solved wave on 101 points, 50 steps (leapfrog)"),
        ("compute_error", err, "l2 error below 1e-12 against reference"),
    ]
    doc = case_doc(
        "wave_f1", "Wave",
        "Solve u_tt = u_xx from sin(pi*x) at rest to t = 0.5 and check the standing "
        "wave; the planned 20-step grid is unstable and retrying cannot fix it, so the "
        "plan itself must be revised.",
        pattern, expected,
        {"reference": "cos(pi*t)*sin(pi*x)", "norm": "l2", "threshold": 1e-06})
    cases.append((doc, script_doc(
        "wave_f1", [plan_record(plan), plan_record(replan)], parser, orch)))

    return cases


def write_json(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1) + "\n")


def write_pack(name, cases):
    pack_dir = PACKS / name
    files = []
    for doc, script in cases:
        write_json(pack_dir / f"{doc['id']}.json", doc)
        write_json(pack_dir / "scripts" / f"{doc['id']}.json", script)
        files.append(f"{doc['id']}.json")
    write_json(pack_dir / "pack.json", {"name": name, "cases": files})


def main():
    main_list = main_cases()
    fault_list = fault_cases()
    write_pack("mainpack", main_list)
    write_pack("faultpack", fault_list)

    # Mixed manifest: the fault-free cases plus one fault-injected case, for
    # comparing recovery-enabled and checkpoint-free modes on the same input.
    mixed = [f"../mainpack/{doc['id']}.json" for doc, _ in main_list
             if doc["id"] != "wave_02"]
    mixed.append("../faultpack/wave_f1.json")
    write_json(PACKS / "mainpack_fault" / "pack.json",
               {"name": "mainpack_fault", "cases": mixed})

    total = len(main_list) + len(fault_list)
    print(f"wrote {total} cases across 3 packs under {PACKS}")


if __name__ == "__main__":
    main()
