"""Command line batch driver emitting versioned JSON reports.

Each command reads its parameters from flags, optionally loads instances
from a JSON file, runs one verification suite, and writes a report with
a schema version.  Reports are byte stable for a fixed seed and worker
count: the instance list is laid out up front with per-instance seeds,
worker processes fill in precomputed slots, and the merge preserves
submission order, so scheduling never shows in the output.

Exit codes: 0 every check passed, 1 a verification failed, 2 unusable
input, 3 a desk-scale resource limit was hit.
"""

import argparse
import itertools
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor

from .errors import ConfigMismatch, NotSmall, SizeLimit, WorkbenchError
from .padic import FieldConfig, INFINITY
from .series import (ModelRing, PDElement, PDForm, form_differential,
                     form_from_element, poincare_solve)
from .witt import (FiniteField, MonomialAlgebra, WittVector, teichmueller,
                   teich_difference_expansion, witt_structure, witt_zero)
from .monoids import (ChartDescriptor, FGMonoid, MonoidMap, exactify,
                      free_monoid, is_integral, is_saturated)
from .correspond import (ConnectionDatum, compare_cohomology,
                         instance_from_json, mic_to_rep, random_connection,
                         random_rep, rep_to_mic, roundtrip_check)

_SCHEMA = 1


class RunConfig:
    """One batch run: command, arithmetic bounds, instance source, output."""

    __slots__ = ("command", "p", "precision", "t_order", "pd_cap", "rank",
                 "dim", "seed", "instances", "source", "out", "workers")

    def __init__(self, command, p, precision, t_order, pd_cap, rank, dim,
                 seed, instances, source, out, workers):
        bounds = {"p": p, "precision": precision, "t_order": t_order,
                  "pd_cap": pd_cap, "rank": rank, "dim": dim,
                  "instances": instances, "workers": workers}
        for name, value in bounds.items():
            if value < 1:
                raise ConfigMismatch(f"{name} must be positive, got {value}")
        if seed < 0:
            raise ConfigMismatch(f"seed must be nonnegative, got {seed}")
        self.command = command
        self.p = p
        self.precision = precision
        self.t_order = t_order
        self.pd_cap = pd_cap
        self.rank = rank
        self.dim = dim
        self.seed = seed
        self.instances = instances
        self.source = source
        self.out = out
        self.workers = workers

    def to_json(self):
        return {"p": self.p, "precision": self.precision,
                "t_order": self.t_order, "pd_cap": self.pd_cap,
                "rank": self.rank, "dim": self.dim, "seed": self.seed,
                "instances": self.instances, "source": self.source,
                "workers": self.workers}


def _show_valuation(v):
    return "inf" if v is INFINITY else str(v)


def _instance_seed(seed, index):
    return seed * 1_000_003 + index


def _run_batch(worker, specs, nworkers):
    if nworkers <= 1 or len(specs) <= 1:
        return [worker(spec) for spec in specs]
    with ProcessPoolExecutor(max_workers=nworkers) as pool:
        return list(pool.map(worker, specs))


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigMismatch(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _monomials(dim, top):
    """Nonzero exponent multi-indices with total degree at most top."""
    for J in itertools.product(range(top + 1), repeat=dim):
        if 0 < sum(J) <= top:
            yield J


# ---------------------------------------------------------------------------
# roundtrip: translate instances across the dictionary and back
# ---------------------------------------------------------------------------


def _roundtrip_instance(spec):
    field = FieldConfig(spec["p"], precision=spec["precision"])
    entry = {"index": spec["index"]}
    try:
        if "payload" in spec:
            payload = spec["payload"]
            ring = ModelRing(field, int(payload["t_order"]))
            datum = instance_from_json(ring, payload)
        else:
            ring = ModelRing(field, spec["t_order"])
            entry["seed"] = spec["instance_seed"]
            rng = random.Random(spec["instance_seed"])
            maker = (random_connection if spec["kind"] == "connection"
                     else random_rep)
            datum = maker(rng, ring, spec["rank"], spec["dim"])
        entry["kind"] = ("connection" if isinstance(datum, ConnectionDatum)
                         else "rep")
        report = roundtrip_check(datum, pd_cap=spec["pd_cap"])
        entry["defect_floor"] = _show_valuation(report.defect_floor)
        entry["derived"] = {k: _show_valuation(v)
                            for k, v in sorted(report.derived.items())}
        entry["meets_digits"] = report.meets(spec["digits"])
        if isinstance(datum, ConnectionDatum):
            verdict = compare_cohomology(
                mic_to_rep(datum, pd_cap=spec["pd_cap"]), datum)
        else:
            verdict = compare_cohomology(
                datum, rep_to_mic(datum, pd_cap=spec["pd_cap"]))
        entry["cohomology_match"] = bool(verdict)
        entry["passes"] = entry["meets_digits"] and entry["cohomology_match"]
    except NotSmall as exc:
        entry["error"] = "not_small"
        entry["detail"] = str(exc)
        entry["passes"] = False
    return entry


def cmd_roundtrip(cfg):
    if cfg.rank > 4 or cfg.dim > 3 or cfg.t_order > 3:
        raise SizeLimit(
            f"roundtrip suite runs at rank <= 4, dim <= 3, t_order <= 3; "
            f"got rank={cfg.rank} dim={cfg.dim} t_order={cfg.t_order}")
    digits = cfg.precision - 2
    shared = {"p": cfg.p, "precision": cfg.precision, "pd_cap": cfg.pd_cap,
              "digits": digits}
    specs = []
    if cfg.source is not None:
        payloads = _load_json(cfg.source)
        if not isinstance(payloads, list):
            raise ConfigMismatch(
                f"{cfg.source}: instance file must hold a JSON list")
        for i, payload in enumerate(payloads):
            specs.append(dict(shared, index=i, payload=payload))
    else:
        for i in range(cfg.instances):
            specs.append(dict(
                shared, index=i, t_order=cfg.t_order, rank=cfg.rank,
                dim=cfg.dim, kind="connection" if i % 2 == 0 else "rep",
                instance_seed=_instance_seed(cfg.seed, i)))
    results = _run_batch(_roundtrip_instance, specs, cfg.workers)
    return {"schema": _SCHEMA, "command": "roundtrip",
            "config": cfg.to_json(), "results": results,
            "passed": all(r["passes"] for r in results)}


# ---------------------------------------------------------------------------
# poincare: exactness of the divided-power de Rham complex
# ---------------------------------------------------------------------------


def _random_pd_element(rng, ring, dim, cap, top):
    field = ring.field
    span = field.p ** 2
    terms = {}
    for J in itertools.product(range(top + 1), repeat=dim):
        if sum(J) > top:
            continue
        coeffs = [field.integer(rng.randrange(-span, span + 1))
                  for _ in range(ring.t_order)]
        terms[J] = ring.series(coeffs)
    return PDElement(ring, dim, cap, terms)


def _poincare_instance(spec):
    field = FieldConfig(spec["p"], precision=spec["precision"])
    ring = ModelRing(field, spec["t_order"])
    dim, cap, top = spec["dim"], spec["pd_cap"], spec["pd_cap"] - 1
    rng = random.Random(spec["instance_seed"])
    degree = 1 + rng.randrange(dim)
    if degree == 1:
        below = form_from_element(
            _random_pd_element(rng, ring, dim, cap, top))
    else:
        comps = {}
        for S in itertools.combinations(range(dim), degree - 1):
            comps[S] = _random_pd_element(rng, ring, dim, cap, top)
        below = PDForm(ring, dim, cap, degree - 1, comps)
    cocycle = form_differential(below)
    primitive = poincare_solve(cocycle)
    certified = form_differential(primitive).agrees_with(cocycle)
    return {"index": spec["index"], "seed": spec["instance_seed"],
            "degree": degree, "certified": certified, "passes": certified}


def cmd_poincare(cfg):
    if cfg.dim > 3 or cfg.pd_cap > 8 or cfg.t_order > 3:
        raise SizeLimit(
            f"poincare suite runs at dim <= 3, pd_cap <= 8, t_order <= 3; "
            f"got dim={cfg.dim} pd_cap={cfg.pd_cap} t_order={cfg.t_order}")
    field = FieldConfig(cfg.p, precision=cfg.precision)
    ring = ModelRing(field, cfg.t_order)
    # degree-0 statement: the differential of every nonconstant monomial
    # keeps a reliably nonzero coefficient in a slot no other monomial
    # reaches, so the kernel on the degree slice is exactly B_n
    monomials = 0
    separated = True
    for J in _monomials(cfg.dim, cfg.pd_cap - 1):
        monomials += 1
        x = PDElement(ring, cfg.dim, cfg.pd_cap, {J: ring.one()})
        w = form_differential(form_from_element(x))
        i = next(k for k in range(cfg.dim) if J[k] > 0)
        lowered = tuple(j - (1 if k == i else 0) for k, j in enumerate(J))
        if w.component((i,)).coefficient(lowered).is_zerolike:
            separated = False
    specs = [{"index": i, "p": cfg.p, "precision": cfg.precision,
              "t_order": cfg.t_order, "dim": cfg.dim, "pd_cap": cfg.pd_cap,
              "instance_seed": _instance_seed(cfg.seed, i)}
             for i in range(cfg.instances)]
    results = _run_batch(_poincare_instance, specs, cfg.workers)
    passed = separated and all(r["passes"] for r in results)
    return {"schema": _SCHEMA, "command": "poincare",
            "config": cfg.to_json(),
            "kernel_is_constants": separated, "monomials_checked": monomials,
            "results": results, "passed": passed}


# ---------------------------------------------------------------------------
# witt: structure polynomial divisibility and ring axioms
# ---------------------------------------------------------------------------


def cmd_witt(cfg):
    length = cfg.t_order
    if length > 3:
        raise SizeLimit(f"witt suite runs at length <= 3, got {length}")
    p = cfg.p
    polys = witt_structure(p, length)
    terms, quotients = teich_difference_expansion(p, length)
    reassembles = True
    if length > 1:
        base = MonomialAlgebra(p, 2, length - 1)
        x, y = base.variable(0), base.variable(1)
        diff = (teichmueller(base, x, length)
                - teichmueller(base, y, length))
        acc = witt_zero(base, length)
        for n, pn in enumerate(terms):
            acc = acc + teichmueller(base, pn, length).scalar_int(p ** n)
        reassembles = acc == diff
    probes = []
    field = FiniteField(p)
    rng = random.Random(cfg.seed)
    for i in range(cfg.instances):
        draw = lambda: WittVector(
            field, [field.element(rng.randrange(p)) for _ in range(length)])
        a, b, c = draw(), draw(), draw()
        ok = (a + b == b + a
              and (a + b) + c == a + (b + c)
              and a * b == b * a
              and (a * b) * c == a * (b * c)
              and a * (b + c) == a * b + a * c
              and a + witt_zero(field, length) == a)
        probes.append({"index": i, "passes": ok})
    passed = reassembles and all(pr["passes"] for pr in probes)
    return {"schema": _SCHEMA, "command": "witt", "config": cfg.to_json(),
            "structure_terms": {k: len(v) for k, v in sorted(polys.items())},
            "difference_terms": len(terms),
            "division_witnesses": len(quotients),
            "difference_reassembles": reassembles,
            "results": probes, "passed": passed}


# ---------------------------------------------------------------------------
# monoid: exactification certificates over the bundled corpus
# ---------------------------------------------------------------------------


def _monoid_corpus():
    doubled = FGMonoid(2, [((2, 0), (0, 2))])
    mod_two = FGMonoid(1, [((2,), (0,))])
    return [
        ("identity on N^2",
         MonoidMap(free_monoid(2), free_monoid(2), [(1, 0), (0, 1)])),
        ("addition N^2 -> N",
         MonoidMap(free_monoid(2), free_monoid(1), [(1,), (1,)])),
        ("addition N^3 -> N",
         MonoidMap(free_monoid(3), free_monoid(1), [(1,), (1,), (1,)])),
        ("pairing N^3 -> N^2",
         MonoidMap(free_monoid(3), free_monoid(2),
                   [(1, 0), (0, 1), (1, 1)])),
        ("coordinate drop N^3 -> N^2",
         MonoidMap(free_monoid(3), free_monoid(2),
                   [(1, 0), (0, 1), (0, 0)])),
        ("torsion kernel (2x=2y) -> N",
         MonoidMap(doubled, free_monoid(1), [(1,), (1,)])),
        ("quotient N -> N/2", MonoidMap(free_monoid(1), mod_two, [(1,)])),
        ("chart r=0", ChartDescriptor(2, 0, 1).valuation_map()),
        ("chart r=1", ChartDescriptor(3, 1, 1).valuation_map()),
        ("chart r=2", ChartDescriptor(3, 2, 1).valuation_map()),
        ("weighted chart r=1",
         ChartDescriptor(2, 1, 1).valuation_map(weights=(2, 1))),
    ]


def cmd_monoid(cfg):
    results = []
    for label, f in _monoid_corpus():
        ex = exactify(f)
        entry = {"case": label, "certified": bool(ex),
                 "kernel_rank": ex.kernel_rank,
                 "generators": len(ex.generator_vectors),
                 "group_preserved": (ex.mprime.group_structure()
                                     == f.source.group_structure())}
        entry["passes"] = entry["certified"] and entry["group_preserved"]
        results.append(entry)
    # idempotence spot checks where the second kernel stays at desk scale
    for label, f in _monoid_corpus()[1:2] + _monoid_corpus()[6:7]:
        first = exactify(f)
        second = exactify(first.projection)
        results.append({"case": f"re-exactified {label}",
                        "certified": bool(second),
                        "kernel_rank": second.kernel_rank,
                        "generators": len(second.generator_vectors),
                        "group_preserved": (second.mprime.group_structure()
                                            == first.mprime.group_structure()),
                        "passes": bool(second)
                        and second.kernel_rank == first.kernel_rank})
    predicates = [
        {"monoid": "free rank 2", "integral": is_integral(free_monoid(2)),
         "saturated": is_saturated(free_monoid(2))},
        {"monoid": "2x = 2y",
         "integral": is_integral(FGMonoid(2, [((2, 0), (0, 2))])),
         "saturated": is_saturated(FGMonoid(2, [((2, 0), (0, 2))]))},
        {"monoid": "x + y = 2y",
         "integral": is_integral(FGMonoid(2, [((1, 1), (0, 2))])),
         "saturated": is_saturated(FGMonoid(2, [((1, 1), (0, 2))]))},
        {"monoid": "3x = 2y",
         "integral": is_integral(FGMonoid(2, [((3, 0), (0, 2))])),
         "saturated": is_saturated(FGMonoid(2, [((3, 0), (0, 2))]))},
    ]
    return {"schema": _SCHEMA, "command": "monoid", "config": cfg.to_json(),
            "results": results, "predicates": predicates,
            "passed": all(r["passes"] for r in results)}


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


_DISPATCH = {"roundtrip": cmd_roundtrip, "poincare": cmd_poincare,
             "witt": cmd_witt, "monoid": cmd_monoid}


def _build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--p", type=int, default=3,
                        help="residue characteristic (default 3)")
    shared.add_argument("--precision", type=int, default=8,
                        help="certified p-adic digits (default 8)")
    shared.add_argument("--t-order", type=int, default=2, dest="t_order",
                        help="series truncation order; Witt length for the "
                             "witt command (default 2)")
    shared.add_argument("--pd-cap", type=int, default=8, dest="pd_cap",
                        help="divided-power degree cap (default 8)")
    shared.add_argument("--rank", type=int, default=2,
                        help="module rank for generated instances")
    shared.add_argument("--dim", type=int, default=1,
                        help="number of variables or operators")
    shared.add_argument("--seed", type=int, default=0,
                        help="master seed; recorded in the report")
    shared.add_argument("--instances", type=int, default=20,
                        help="generated instance count (default 20)")
    shared.add_argument("--in", dest="source", default=None,
                        help="JSON instance file; overrides the generator")
    shared.add_argument("--out", default=None,
                        help="report path (default: stdout)")
    shared.add_argument("--workers", type=int, default=1,
                        help="parallel worker processes (default 1)")
    parser = argparse.ArgumentParser(
        prog="padicrh",
        description="Batch verification suites for the truncated "
                    "Riemann-Hilbert workbench; JSON in, JSON out.")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser(
        "roundtrip", parents=[shared],
        help="translate instances across the dictionary and back, "
             "checking defect floors and cohomology agreement")
    commands.add_parser(
        "poincare", parents=[shared],
        help="certify exactness of the divided-power de Rham complex")
    commands.add_parser(
        "witt", parents=[shared],
        help="structure polynomial divisibility and Witt ring axioms")
    commands.add_parser(
        "monoid", parents=[shared],
        help="exactification certificates over the bundled corpus")
    return parser


def _write_report(report, out):
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command, p=args.p, precision=args.precision,
            t_order=args.t_order, pd_cap=args.pd_cap, rank=args.rank,
            dim=args.dim, seed=args.seed, instances=args.instances,
            source=args.source, out=args.out, workers=args.workers)
        report = _DISPATCH[cfg.command](cfg)
    except SizeLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except (ConfigMismatch, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except WorkbenchError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    _write_report(report, cfg.out)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
