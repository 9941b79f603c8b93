"""Command-line driver: every verification as a seeded run emitting JSON or CSV.

Exit codes: 0 when every check passes, 1 when a claim fails numerically,
2 on usage or input errors.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import os
import sys
from dataclasses import dataclass, field

import click
import numpy as np

from . import __version__
from .circuit import circuit_channel, locc_validate, simulate
from .decomp import ClassificationError, classify
from .discrimination import (
    FamilyError,
    entanglement_gap_report,
    schmidt_strength_closed_form,
    schmidt_strength_numeric,
)
from .linalg import CNOT, CZ, SWAP, TOL, DimensionError, H, I2, X, as_matrix, is_unitary, matrix_from_json
from .locc_star import (
    GAMMA_TABLE,
    ProcessMatrix,
    b8_process_matrix,
    cc_star_from_classical_process,
    check_no_signaling,
    gamma_cc_star,
    gamma_sep_terms,
    lemma3_structure_check,
    multipartite_sep_to_locc_star,
    nine_state_table_map,
    nine_state_vectors,
    one_way_process,
    random_sep_terms,
    sep_choi,
    sep_to_locc_star,
    tripartite_gamma,
    validate_process_matrix,
)
from .netcode import (
    NetworkGraph,
    brute_force_focused_gflow,
    build_cluster,
    build_named,
    butterfly_unitary_protocol,
    decide_ladder,
    decide_probabilistic,
    find_focused_gflow,
    kobayashi_butterfly,
    u_global,
)
from .netcode.protocols import KOBAYASHI_ORDER, kobayashi_encoding, kobayashi_target_state
from .ops import choi_of_unitary

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

ISWAP = np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex)
SQRT_SWAP = np.array(
    [[1, 0, 0, 0], [0, (1 + 1j) / 2, (1 - 1j) / 2, 0], [0, (1 - 1j) / 2, (1 + 1j) / 2, 0], [0, 0, 0, 1]],
    dtype=complex,
)

NAMED_GATES = {
    "identity": np.eye(4, dtype=complex),
    "swap": SWAP,
    "cnot": CNOT,
    "cz": CZ,
    "iswap": ISWAP,
    "sqrt-swap": SQRT_SWAP,
    "h⊗i": np.kron(H, I2),
    "x⊗x": np.kron(X, X),
}
GATE_ALIASES = {"id": "identity", "i": "identity", "hxi": "h⊗i", "h_i": "h⊗i", "xxx": "x⊗x", "x_x": "x⊗x", "sqrtswap": "sqrt-swap"}


def named_gate(name: str) -> np.ndarray:
    key = GATE_ALIASES.get(name.lower(), name.lower())
    if key not in NAMED_GATES:
        raise click.BadParameter(f"unknown gate {name!r}; known: {', '.join(NAMED_GATES)}", param_hint="--gate")
    return NAMED_GATES[key].copy()


@dataclass
class RunConfig:
    command: str = ""
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    tolerances: dict = field(default_factory=TOL.as_dict)
    output: str | None = None

    def header(self) -> dict:
        return {
            "tool_version": __version__,
            "seed": self.seed,
            "tolerances": dict(self.tolerances),
            "wall_time_excluded": True,
        }

    @property
    def equality(self) -> float:
        return float(self.tolerances["equality"])


def _resolve_seed(flag: int | None, config: dict) -> int:
    """Explicit ``--seed`` wins, then ``QNET_SEED``, then the config file, then 0."""
    if flag is not None:
        return flag
    env = os.environ.get("QNET_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise click.BadParameter(f"QNET_SEED must be an integer, got {env!r}") from exc
    return int(config.get("seed", 0))


def _tolerances(overrides: tuple[str, ...], config: dict) -> dict:
    tol = TOL.as_dict()
    tol.update({k: float(v) for k, v in config.get("tolerances", {}).items() if k in tol})
    for item in overrides:
        key, sep, val = item.partition("=")
        if not sep or key not in tol:
            raise click.BadParameter(f"expected NAME=VALUE with NAME in {sorted(tol)}, got {item!r}", param_hint="--tol")
        try:
            tol[key] = float(val)
        except ValueError as exc:
            raise click.BadParameter(f"tolerance {key} needs a number, got {val!r}", param_hint="--tol") from exc
    return tol


def _clean(v):
    """JSON-friendly copy: numpy scalars and arrays become Python values, non-finite floats become strings."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        if np.iscomplexobj(v):
            return {"re": _clean(v.real.tolist()), "im": _clean(v.imag.tolist())}
        return _clean(v.tolist())
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if np.isfinite(f) else str(f)
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return v


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _finish(ctx: click.Context, body: dict, passed: bool) -> None:
    cfg: RunConfig = ctx.obj
    report = {"header": cfg.header(), "command": cfg.command, "parameters": _clean(cfg.parameters)}
    report.update(_clean(body))
    report["passed"] = bool(passed)
    _emit(cfg, json.dumps(report, indent=2, sort_keys=True) + "\n")
    ctx.exit(EXIT_OK if passed else EXIT_FAILED)


def _start(ctx: click.Context, command: str, **params) -> RunConfig:
    cfg: RunConfig = ctx.obj
    cfg.command = command
    cfg.parameters = params
    return cfg


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise click.BadParameter(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise click.BadParameter(f"{path} is not valid JSON: {exc}") from exc


def _gate_source(gate: str | None, path: str | None) -> np.ndarray:
    if (gate is None) == (path is None):
        raise click.UsageError("give exactly one of --gate or --file")
    if gate is not None:
        return named_gate(gate)
    try:
        u = matrix_from_json(_load_json(path))
        u = as_matrix(u, 4, 4)
    except (ValueError, DimensionError, KeyError, TypeError) as exc:
        raise click.BadParameter(f"{path}: {exc}", param_hint="--file") from exc
    if not is_unitary(u):
        raise click.BadParameter(f"{path}: matrix is not unitary", param_hint="--file")
    return u


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="qnet")
@click.option("--seed", type=int, default=None, help="Seed for every stochastic choice (overrides QNET_SEED).")
@click.option("--tol", "tol", multiple=True, metavar="NAME=VALUE", help="Tolerance override, e.g. equality=1e-10.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="JSON run config with seed and tolerances.")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Write the report here instead of stdout.")
@click.pass_context
def main(ctx: click.Context, seed, tol, config_path, output):
    """Verification runs for quantum network coding and LOCC machinery."""
    config = _load_json(config_path) if config_path else {}
    if not isinstance(config, dict):
        raise click.BadParameter("config must be a JSON object", param_hint="--config")
    ctx.obj = RunConfig(
        seed=_resolve_seed(seed, config),
        tolerances=_tolerances(tol, config),
        output=output or config.get("output"),
    )


# ---------------------------------------------------------------------------
# classify


@main.command("classify")
@click.option("--gate", default=None, help="Named gate: " + ", ".join(NAMED_GATES))
@click.option("--file", "path", type=click.Path(dir_okay=False), default=None, help="4x4 matrix JSON {rows, cols, re, im}.")
@click.pass_context
def classify_cmd(ctx, gate, path):
    """Operator Schmidt rank, KC number and canonical parameters of a two-qubit gate."""
    cfg = _start(ctx, "classify", gate=gate, file=path)
    u = _gate_source(gate, path)
    try:
        rep = classify(u, tol=float(cfg.tolerances["rank"]))
    except ClassificationError as exc:
        _finish(ctx, {"error": str(exc)}, False)
        return
    _finish(ctx, rep, rep["reconstruction_error"] <= cfg.equality)


# ---------------------------------------------------------------------------
# network


@main.group("network")
def network():
    """Network coding protocols and deciders."""


@network.command("decide")
@click.option("--gate", default=None)
@click.option("--file", "path", type=click.Path(dir_okay=False), default=None)
@click.option("--ladder", "n_cols", type=int, default=None, help="Deterministic decision over the (2, N)-cluster.")
@click.option("--probabilistic", "prob", type=(int, int), default=None, metavar="K N", help="Probabilistic decision over the (K, N)-cluster.")
@click.option("--restarts", type=int, default=24, show_default=True)
@click.pass_context
def decide_cmd(ctx, gate, path, n_cols, prob, restarts):
    """Implementability of a two-qubit gate over a cluster network."""
    cfg = _start(ctx, "network decide", gate=gate, file=path, ladder=n_cols, probabilistic=prob, restarts=restarts)
    u = _gate_source(gate, path)
    if (n_cols is None) == (prob is None):
        raise click.UsageError("give exactly one of --ladder or --probabilistic")
    if n_cols is not None:
        if n_cols < 0:
            raise click.BadParameter("N must be non-negative", param_hint="--ladder")
        dec = decide_ladder(u, n_cols)
    else:
        dec = decide_probabilistic(u, prob[0], prob[1], seed=cfg.seed, restarts=restarts)
    body = dec.to_json()
    witness_ok = dec.error is None or dec.error <= max(cfg.equality, float(cfg.tolerances["rank"]))
    _finish(ctx, body, witness_ok)


def _branch_probabilities(circ, din: int, bit: str) -> dict:
    trace = simulate(circ, np.eye(din, dtype=complex) / np.sqrt(din), reference_dim=din, keep_bits=[bit])
    probs: dict = {}
    for b in trace.branches:
        k = str(b.bits.get(bit))
        probs[k] = probs.get(k, 0.0) + b.probability
    return dict(sorted(probs.items()))


@network.command("butterfly-protocol")
@click.option("--x", "x", type=float, required=True)
@click.option("--y", "y", type=float, required=True)
@click.option("--z", "z", type=float, required=True)
@click.pass_context
def butterfly_cmd(ctx, x, y, z):
    """Simulate the LOCC butterfly circuit for U_global(x, y, z) and compare channels."""
    cfg = _start(ctx, "network butterfly-protocol", x=x, y=y, z=z)
    circ = butterfly_unitary_protocol(x, y, z)
    chan, _ = circuit_channel(circ)
    err = chan.distance(choi_of_unitary(u_global(x, y, z)))
    tr = locc_validate(circ, build_named("butterfly"))
    probs = _branch_probabilities(circ, circ.input_dim(), "k")
    body = {
        "channel_error": err,
        "locc_valid": tr.valid,
        "classical_bits": tr.classical_bits,
        "epr_edges": tr.epr_edges,
        "branch_probabilities": probs,
    }
    _finish(ctx, body, err <= cfg.equality and tr.valid)


@network.command("kobayashi")
@click.option("--samples", type=int, default=20, show_default=True, help="Seeded input amplitude sets.")
@click.pass_context
def kobayashi_cmd(ctx, samples):
    """Two-pair communication over the butterfly: per-branch fidelity and the encoded state."""
    cfg = _start(ctx, "network kobayashi", samples=samples)
    if samples < 1:
        raise click.BadParameter("need at least one sample", param_hint="--samples")
    rng = np.random.default_rng(cfg.seed)
    lams = [np.full(4, 0.5, dtype=complex), np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)]
    while len(lams) < samples:
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        lams.append(v / np.linalg.norm(v))
    lams = lams[:samples]
    circ = kobayashi_butterfly()
    enc = kobayashi_encoding()
    worst_fid, worst_enc, n_branches = 1.0, 0.0, 0
    for lam in lams:
        trace = simulate(circ, lam, merge=False)
        n_branches = max(n_branches, len(trace.branches))
        for b in trace.branches:
            worst_fid = min(worst_fid, abs(np.vdot(lam, b.vector(["Abar", "Bbar"]))) ** 2)
        st = simulate(enc, lam).branches[0].vector(KOBAYASHI_ORDER)
        worst_enc = max(worst_enc, float(np.linalg.norm(st - kobayashi_target_state(lam))))
    tr = locc_validate(circ, build_named("butterfly"))
    body = {
        "min_fidelity": worst_fid,
        "encoded_state_error": worst_enc,
        "branches_per_input": n_branches,
        "locc_valid": tr.valid,
        "classical_bits": tr.classical_bits,
    }
    _finish(ctx, body, worst_fid >= 1 - cfg.equality and worst_enc <= cfg.equality and tr.valid)


def _parse_graph(name: str) -> NetworkGraph:
    low = name.lower()
    if low in ("butterfly", "grail", "square"):
        return build_named(low)
    if low == "path2":
        return NetworkGraph(("a", "b"), {"e": ("a", "b")}, ("a",), ("b",))
    if low.startswith("cluster:"):
        try:
            k, n = (int(t) for t in low.split(":", 1)[1].split(","))
            return build_cluster(k, n)
        except ValueError as exc:
            raise click.BadParameter(f"expected cluster:K,N, got {name!r}", param_hint="--graph") from exc
    raise click.BadParameter(f"unknown graph {name!r}; use butterfly, grail, square, path2 or cluster:K,N", param_hint="--graph")


@network.command("gflow")
@click.option("--graph", "graph_name", required=True, help="butterfly, grail, square, path2 or cluster:K,N")
@click.option("--exhaustive/--no-exhaustive", default=True, show_default=True, help="Cross-check with brute force.")
@click.pass_context
def gflow_cmd(ctx, graph_name, exhaustive):
    """Focused gflow of the open graph (G, inputs, outputs)."""
    _start(ctx, "network gflow", graph=graph_name, exhaustive=exhaustive)
    g = _parse_graph(graph_name)
    res = find_focused_gflow(g)
    body = {"focused_gflow": res.to_json()["g"] if res.exists else "none", "gflow": res.to_json()}
    agree = True
    if exhaustive:
        brute = brute_force_focused_gflow(g, g.inputs, g.outputs)
        body["exhaustive_exists"] = brute is not None
        agree = (brute is not None) == res.exists
    _finish(ctx, body, agree)


# ---------------------------------------------------------------------------
# locc-star


@main.group("locc-star")
def locc_star():
    """LOCC* maps, SEP conversion and process matrices."""


@locc_star.command("nine-state")
@click.pass_context
def nine_state_cmd(ctx):
    """Loop LOCC* map identifying the nine product states."""
    cfg = _start(ctx, "locc-star nine-state")
    m = nine_state_table_map()
    errors = []
    for k, psi in enumerate(nine_state_vectors()):
        out = m.apply(np.outer(psi, psi.conj()))
        kk = np.zeros(81, dtype=complex)
        kk[k * 9 + k] = 1
        errors.append(float(np.linalg.norm(out - np.outer(kk, kk))))
    orders = {"none": [], "A<B": [("A", "B")], "B<A": [("B", "A")]}
    ns = {name: check_no_signaling(m.cc, o) for name, o in orders.items()}
    ok = max(errors) <= 1e-12 and m.tp and max(m.completeness_defects()) <= cfg.equality and not any(ns.values())
    body = {
        "identified": sum(e <= 1e-12 for e in errors),
        "errors": errors,
        "tp": m.tp,
        "cp": m.cp,
        "completeness_defects": m.completeness_defects(),
        "no_signaling": ns,
    }
    _finish(ctx, body, ok)


def _parse_dims(text: str) -> tuple:
    try:
        vals = [int(t) for t in text.split(",")]
    except ValueError as exc:
        raise click.BadParameter(f"expected dIA,dOA,dIB,dOB, got {text!r}", param_hint="--dims") from exc
    if len(vals) == 2:
        vals = [vals[0], vals[0], vals[1], vals[1]]
    if len(vals) != 4 or min(vals) < 1 or max(vals) > 4:
        raise click.BadParameter("need two or four dimensions between 1 and 4", param_hint="--dims")
    return ((vals[0], vals[1]), (vals[2], vals[3]))


@locc_star.command("sep2locc")
@click.option("--samples", type=int, default=10, show_default=True)
@click.option("--dims", default="2,2", show_default=True, help="dIA,dOA,dIB,dOB, or dA,dB for square maps.")
@click.pass_context
def sep2locc_cmd(ctx, samples, dims):
    """Convert seeded TP SEP maps to loop LOCC* maps and compare channels."""
    cfg = _start(ctx, "locc-star sep2locc", samples=samples, dims=dims)
    if samples < 0:
        raise click.BadParameter("samples must be non-negative", param_hint="--samples")
    dd = _parse_dims(dims)
    rng = np.random.default_rng(cfg.seed)
    worst, all_tp = 0.0, True
    for _ in range(samples):
        terms = random_sep_terms(dd, rng)
        m = sep_to_locc_star(terms, dd)
        worst = max(worst, m.choi.distance(sep_choi(terms, dd)))
        all_tp &= m.tp
    body = {"samples": samples, "max_channel_distance": worst, "all_tp": all_tp}
    _finish(ctx, body, worst <= cfg.equality and all_tp)


@locc_star.command("tripartite")
@click.pass_context
def tripartite_cmd(ctx):
    """Assemble the tripartite Gamma map and check its structure."""
    cfg = _start(ctx, "locc-star tripartite")
    rep = tripartite_gamma()
    m = rep.map
    terms = gamma_sep_terms()
    ring = multipartite_sep_to_locc_star(terms, [(2, 4)] * 3)
    ring_dist = ring.choi.distance(m.choi)
    parties = m.cc.parties
    ns = {
        "<".join(p): check_no_signaling(m.cc, list(zip(p, p[1:]))) for p in itertools.permutations(parties)
    }
    w_cc = cc_star_from_classical_process(b8_process_matrix())
    match_w = w_cc.table == gamma_cc_star().table
    body = {
        "expansion_distance": rep.expansion_distance,
        "expansion_match": rep.expansion_distance <= 1e-12,
        "tp": m.tp,
        "cp": m.cp,
        "lemma3_accepts": lemma3_structure_check(terms),
        "ring_locc_star_distance": ring_dist,
        "ring_tp": ring.tp,
        "no_signaling": ns,
        "cc_star_from_process_matches": match_w,
        "table_rows": len(GAMMA_TABLE),
    }
    ok = (
        body["expansion_match"]
        and m.tp
        and body["lemma3_accepts"]
        and ring_dist <= cfg.equality
        and ring.tp
        and not any(ns.values())
        and match_w
    )
    _finish(ctx, body, ok)


def _load_process(name: str | None, path: str | None) -> ProcessMatrix:
    if (name is None) == (path is None):
        raise click.UsageError("give exactly one of --w or --file")
    if name is not None:
        low = name.lower()
        if low == "b8":
            return b8_process_matrix()
        if low == "oneway":
            return one_way_process()
        raise click.BadParameter(f"unknown process {name!r}; use b8 or oneway", param_hint="--w")
    obj = _load_json(path)
    try:
        dims = tuple(tuple(int(x) for x in d) for d in obj["dims"])
        return ProcessMatrix(matrix_from_json(obj["matrix"]), dims)
    except (KeyError, TypeError, ValueError, DimensionError) as exc:
        raise click.BadParameter(f"{path}: expected {{dims: [[dI, dO], ...], matrix: {{...}}}}: {exc}", param_hint="--file") from exc


@locc_star.command("process-check")
@click.option("--w", "w_name", default=None, help="Built-in process: b8 or oneway.")
@click.option("--file", "path", type=click.Path(dir_okay=False), default=None, help="JSON {dims, matrix}.")
@click.option("--battery", type=int, default=200, show_default=True)
@click.pass_context
def process_check_cmd(ctx, w_name, path, battery):
    """Evaluate tr[W (x) M^T] over a CPTP battery and the complete spanning set."""
    cfg = _start(ctx, "locc-star process-check", w=w_name, file=path, battery=battery)
    w = _load_process(w_name, path)
    rep = validate_process_matrix(w, battery=battery, seed=cfg.seed)
    body = rep.to_json()
    body["dims"] = [list(d) for d in w.dims]
    _finish(ctx, body, rep.max_deviation <= cfg.equality and rep.positive)


# ---------------------------------------------------------------------------
# schmidt-strength and discriminate


@main.command("schmidt-strength")
@click.option("--d-max", "d_max", type=int, required=True, help="Largest d (at least 4).")
@click.option("--include-embedded", is_flag=True, help="Also emit the d = 3 row.")
@click.pass_context
def schmidt_strength_cmd(ctx, d_max, include_embedded):
    """CSV of (d, lambda0^2, lambda1^2, H) for V_d with an operator-Schmidt cross-check."""
    cfg = _start(ctx, "schmidt-strength", d_max=d_max, include_embedded=include_embedded)
    if d_max < 4:
        raise click.BadParameter("d-max must be at least 4", param_hint="--d-max")
    ds = ([3] if include_embedded else []) + list(range(4, d_max + 1))
    buf = io.StringIO()
    buf.write("# " + json.dumps({"header": cfg.header(), "command": cfg.command, "parameters": cfg.parameters}, sort_keys=True) + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["d", "lambda0_sq", "lambda1_sq", "H", "numeric_deviation"])
    worst, hs = 0.0, []
    for d in ds:
        cf = schmidt_strength_closed_form(d)
        nu = schmidt_strength_numeric(d)
        dev = max(abs(a - b) for a, b in zip(cf, nu))
        worst = max(worst, dev)
        if d >= 4:
            hs.append(cf[2])
        wr.writerow([d, f"{cf[0]:.12f}", f"{cf[1]:.12f}", f"{cf[2]:.12f}", f"{dev:.3e}"])
    monotone = all(a > b for a, b in zip(hs, hs[1:]))
    passed = worst <= cfg.equality and monotone
    buf.write(f"# passed={str(passed).lower()} max_numeric_deviation={worst:.3e} monotone={str(monotone).lower()}\n")
    _emit(cfg, buf.getvalue())
    ctx.exit(EXIT_OK if passed else EXIT_FAILED)


@main.command("discriminate")
@click.option("--family", type=click.Choice(["nine", "generalized"]), required=True)
@click.option("--dA", "d_a", type=int, default=None, help="Alice's dimension (generalized family).")
@click.option("--dB", "d_b", type=int, default=None, help="Bob's dimension (generalized family).")
@click.option("--d", "d", type=int, default=4, show_default=True, help="Embedding for V_d (nine family).")
@click.pass_context
def discriminate_cmd(ctx, family, d_a, d_b, d):
    """One-way versus two-way entanglement needed to discriminate an orthogonal product basis."""
    cfg = _start(ctx, "discriminate", family=family, dA=d_a, dB=d_b, d=d)
    try:
        if family == "nine":
            if (d_a, d_b) not in ((None, None), (3, 3)):
                raise FamilyError("the nine-state family lives on 3 x 3")
            if d < 3:
                raise FamilyError(f"V_d needs d >= 3, got {d}")
            rep = entanglement_gap_report(3, 3, d)
        else:
            if d_a is None or d_b is None:
                raise FamilyError("the generalized family needs --dA and --dB")
            if (d_a, d_b) == (3, 3):
                raise FamilyError("(3, 3) is the nine-state family; use --family nine")
            if d_a * (d_b + 1) > 64:
                raise FamilyError("dimensions too large for the two-way simulation (d_A (d_B + 1) <= 64)")
            rep = entanglement_gap_report(d_a, d_b)
    except FamilyError as exc:
        raise click.BadParameter(str(exc)) from exc
    cfg.parameters = dict(cfg.parameters, dA=rep["d_A"], dB=rep["d_B"])
    cert = rep["certificates"]
    ok = (
        cert["one_way_zero_error"]
        and cert["two_way_zero_error"]
        and cert["gadget"]["locc_valid"]
        and cert["gadget"]["channel_error"] <= cfg.equality
        and cert["gadget"]["epr_pairs"] == 1
    )
    _finish(ctx, rep, ok)


def run(argv=None) -> int:
    """Invoke the CLI in-process and return its exit code."""
    try:
        main.main(args=argv, prog_name="qnet", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
