"""Command-line front end.

Subcommands: ``graph``, ``closed``, ``sections``, ``product`` and ``selftest``.
Subsets are 1-based simple-root label lists such as ``"1,3"``; the empty
string is the empty subset and ``all`` the full one.  Exit status is 0 on
success, 1 on usage errors and 2 on mathematical domain errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .errors import MathDomainError, UnclassifiedType
from .fga import CustomLaw, make_context
from .moment_graph import (
    ALL_CANDIDATES,
    MIN_LABEL,
    build_double_graph,
    build_parabolic_graph,
    is_closed_brute,
    is_closed_classified,
    wq_closure,
)
from .root_system import SimpleSubset, as_subset, build_root_system
from .sections import (
    graded_basis,
    membership_qap,
    membership_rwq_wp,
    qap_violation,
    rwq_violation,
    section_from_dict,
    section_violation,
    simple_root_form,
    structure_sheaf_double,
)
from .weyl import word_string


class UsageError(Exception):
    """Invalid command-line input."""


@dataclass
class RunConfig:
    kind: str = "A"
    rank: int = 2
    q: list[int] | None = None
    p: list[int] = field(default_factory=list)
    fgl: str = "additive"
    lattice: str = "weight"
    truncation: int = 8
    policy: str = MIN_LABEL
    format: str = "text"
    seed: int = 0

    def validate(self) -> None:
        try:
            self.rs = build_root_system(self.kind, self.rank)
        except MathDomainError:
            raise
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        try:
            self.theta_p = as_subset(self.rank, self.p)
            self.theta_q = None if self.q is None else as_subset(self.rank, self.q)
        except (ValueError, TypeError) as exc:
            raise UsageError(str(exc)) from exc
        if self.policy not in (MIN_LABEL, ALL_CANDIDATES):
            raise UsageError(f"unknown label policy {self.policy!r}")
        if self.format not in ("text", "json", "dot"):
            raise UsageError(f"unknown format {self.format!r}")
        if self.lattice not in ("weight", "root"):
            raise UsageError(f"unknown lattice {self.lattice!r}")

    def context(self):
        if self.fgl in ("additive", "multiplicative"):
            return make_context(self.rs, self.fgl, self.lattice)
        with open(self.fgl) as fh:
            data = json.load(fh)
        if "logarithm" in data:
            law = CustomLaw.from_logarithm([Fraction(c) for c in data["logarithm"]], self.truncation)
        else:
            coeffs = {tuple(int(x) for x in key.split(",")): Fraction(v) for key, v in data["coefficients"].items()}
            law = CustomLaw.from_coefficients(coeffs, self.truncation)
        return make_context(self.rs, "custom", self.lattice, law)


def parse_subset(text: str) -> list[int] | str:
    text = text.strip()
    if text.lower() == "all":
        return "all"
    if not text:
        return []
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise UsageError(f"bad subset {text!r}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with RunConfig fields (flags override it)")
    parser.add_argument("--kind")
    parser.add_argument("--rank", type=int)
    parser.add_argument("--p", help="Theta_P as comma-separated labels")
    parser.add_argument("--q", help="Theta_Q as comma-separated labels")
    parser.add_argument("--fgl", help="additive, multiplicative, or a JSON file with a custom law")
    parser.add_argument("--lattice", choices=["weight", "root"])
    parser.add_argument("--truncation", type=int)
    parser.add_argument("--policy", choices=[MIN_LABEL, ALL_CANDIDATES])
    parser.add_argument("--format", choices=["text", "json", "dot"])
    parser.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="momentgraph", description="Double moment graphs and their structure sheaves.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    g = sub.add_parser("graph", help="export the parabolic graph, the double graph and its closure")
    _common(g)
    c = sub.add_parser("closed", help="closedness verdicts")
    _common(c)
    c.add_argument("--sweep", action="store_true", help="iterate over all subset pairs")
    s = sub.add_parser("sections", help="graded bases or membership checks")
    _common(s)
    s.add_argument("--basis", type=int, metavar="N", help="graded generators up to degree N")
    s.add_argument("--check", metavar="FILE", help="JSON tuple (or list of tuples) to test")
    p = sub.add_parser("product", help="correspondence product of two tuples")
    _common(p)
    p.add_argument("b", help="JSON tuple over W^P (the Q-to-P side)")
    p.add_argument("c", help="JSON tuple over W^H (the P-to-H side)")
    t = sub.add_parser("selftest", help="quick internal consistency checks")
    _common(t)
    return parser


def make_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        unknown = set(data) - set(asdict(cfg))
        if unknown:
            raise UsageError(f"unknown config fields: {sorted(unknown)}")
        for key, value in data.items():
            setattr(cfg, key, value)
    for key in ("kind", "rank", "fgl", "lattice", "truncation", "policy", "format", "seed"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if args.p is not None:
        cfg.p = parse_subset(args.p)
    if args.q is not None:
        cfg.q = parse_subset(args.q)
    cfg.validate()
    return cfg


# -- commands ---------------------------------------------------------------------


def _emit_graph(graph, fmt: str, name: str) -> str:
    if fmt == "dot":
        return graph.to_dot(name)
    if fmt == "json":
        return graph.to_json()
    lines = [f"{name}: {len(graph.vertices)} vertices, {len(graph.edges)} edges"]
    for e in graph.edges:
        lines.append(f"  {graph.word(e.src)} -> {graph.word(e.dst)}  {graph._root_string(e.label)}")
    return "\n".join(lines)


def cmd_graph(cfg: RunConfig) -> list[str]:
    parabolic = build_parabolic_graph(cfg.rs, cfg.theta_p)
    if cfg.theta_q is None:
        return [_emit_graph(parabolic, cfg.format, "parabolic")]
    double = build_double_graph(cfg.rs, cfg.theta_q, cfg.theta_p, cfg.policy)
    closure = wq_closure(cfg.rs, cfg.theta_q, cfg.theta_p)
    smaller = closure.labelled_edges() != parabolic.labelled_edges()
    if cfg.format == "json":
        doc = {
            "parabolic": parabolic.to_dict(),
            "double": double.to_dict(),
            "closure": closure.to_dict(),
            "closed": not smaller,
        }
        return [json.dumps(doc, sort_keys=True, separators=(",", ":"))]
    out = [
        _emit_graph(parabolic, cfg.format, "parabolic"),
        _emit_graph(double, cfg.format, "double"),
        _emit_graph(closure, cfg.format, "closure"),
    ]
    note = "closure is strictly smaller than the parabolic graph" if smaller else "closure equals the parabolic graph"
    out.append(f"// {note}" if cfg.format == "dot" else note)
    return out


def _closed_line(rs, q, p) -> tuple[str, bool]:
    brute = is_closed_brute(rs, q, p)
    try:
        classified = is_closed_classified(rs, q, p)
        agree = classified == brute
        text = f"Q={q} P={p} brute={brute} classified={classified} agree={agree}"
    except UnclassifiedType:
        agree = True
        text = f"Q={q} P={p} brute={brute} classified=n/a"
    return text, agree


def cmd_closed(cfg: RunConfig, sweep: bool) -> tuple[list[str], bool]:
    if sweep:
        pairs = [(q, p) for q in SimpleSubset.all_subsets(cfg.rank) for p in SimpleSubset.all_subsets(cfg.rank)]
    else:
        if cfg.theta_q is None:
            raise UsageError("closed needs --q (or --sweep)")
        pairs = [(cfg.theta_q, cfg.theta_p)]
    lines, ok, closed = [], True, 0
    for q, p in pairs:
        text, agree = _closed_line(cfg.rs, q, p)
        closed += "brute=True" in text
        ok &= agree
        lines.append(text)
    if sweep:
        lines.append(f"{cfg.rs.name}: {closed}/{len(pairs)} pairs closed, all verdicts agree: {ok}")
    return lines, ok


def _load_tuples(ctx, path: str):
    with open(path) as fh:
        data = json.load(fh)
    items = data if isinstance(data, list) else [data]
    try:
        return [section_from_dict(ctx, item) for item in items]
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot parse {path}: {exc}") from exc


def cmd_sections(cfg: RunConfig, basis: int | None, check: str | None) -> tuple[list[str], bool]:
    ctx = cfg.context()
    theta_q = cfg.theta_q if cfg.theta_q is not None else SimpleSubset.empty(cfg.rank)
    lines = []
    ok = True
    if basis is not None:
        gb = graded_basis(ctx, theta_q, cfg.theta_p, basis, "sheaf")
        if cfg.format == "json":
            doc = {str(d): [t.to_dict()["values"] for t in gens] for d, gens in enumerate(gb.generators)}
            lines.append(json.dumps({"ranks": gb.ranks, "dimensions": gb.dimensions, "generators": doc}, sort_keys=True))
        else:
            lines.append(f"dimensions {gb.dimensions}")
            lines.append(f"ranks {gb.ranks}")
            for d, gens in enumerate(gb.generators):
                for t in gens:
                    lines.append(f"  degree {d}: " + ", ".join(f"{k}: {simple_root_form(ctx, v)}" for k, v in _pairs(t)))
    if check is not None:
        sheaf = None
        for t in _load_tuples(ctx, check):
            if t.over_cosets:
                bad = rwq_violation(t)
                lines.append(f"R model member: {bad is None}" + ("" if bad is None else f"  violated {bad}"))
                ok &= bad is None
                continue
            if sheaf is None:
                sheaf = structure_sheaf_double(t.theta_q, t.theta_p, ctx, cfg.policy)
            try:
                edge = section_violation(t, sheaf)
            except MathDomainError as exc:
                lines.append(f"rejected: {exc}")
                ok = False
                continue
            bad = qap_violation(t)
            words = ctx.group.words
            if edge is None:
                lines.append("global section: True")
            else:
                lines.append(
                    f"global section: False  violated edge {word_string(words[edge.src])} -> "
                    f"{word_string(words[edge.dst])} label {list(ctx.rs.roots[edge.label])}"
                )
            lines.append(f"A model member: {bad is None}" + ("" if bad is None else f"  violated {_describe(ctx, bad)}"))
            ok &= edge is None and bad is None
    if basis is None and check is None:
        raise UsageError("sections needs --basis N or --check FILE")
    return lines, ok


def _pairs(t):
    words = t.ctx.group.words
    return [(word_string(words[r]), v) for r, v in zip(t.reps, t.values)]


def _describe(ctx, bad) -> str:
    if bad == "vertex":
        return "vertex invariance"
    words = ctx.group.words
    return (
        f"c[{word_string(words[bad.u])}] - {word_string(words[bad.twist])}(c[{word_string(words[bad.u2])}]) "
        f"not divisible by x{list(ctx.rs.roots[bad.label])}"
    )


def cmd_product(cfg: RunConfig, path_b: str, path_c: str) -> list[str]:
    from .demazure import correspondence_product

    ctx = cfg.context()
    (b,) = _load_tuples(ctx, path_b)[:1]
    (c,) = _load_tuples(ctx, path_c)[:1]
    a = correspondence_product(c, b)
    if cfg.format == "json":
        return [a.to_json()]
    return [", ".join(f"{k}: {simple_root_form(ctx, v)}" for k, v in _pairs(a))]


def cmd_selftest(cfg: RunConfig) -> tuple[list[str], bool]:
    from .demazure import Cofunction, bullet, push_pull, twisted_mul, TwistedElement
    from .fga import additive_context
    from .sections import project_hat, psi, sample_rwq

    checks = []
    rng = random.Random(cfg.seed)
    rs = build_root_system("A", 2)
    double = build_double_graph(rs, [1], [1])
    checks.append(("A2 double graph e -> s2", [(e.src, e.dst) for e in double.edges] == [(0, 2)]))
    b2 = build_root_system("B", 2)
    checks.append(("B2 pair ({1},{2}) not closed", not is_closed_brute(b2, [1], [2])))
    ok_sweep = all(
        is_closed_brute(b2, q, p) == is_closed_classified(b2, q, p)
        for q in SimpleSubset.all_subsets(2)
        for p in SimpleSubset.all_subsets(2)
    )
    checks.append(("B2 classification agrees with brute force", ok_sweep))
    ctx = additive_context(rs)
    t = sample_rwq(ctx, [1], [1], rng)
    checks.append(("psi inverts project_hat", psi(project_hat(t)) == t and membership_qap(project_hat(t))))
    checks.append(("R model sample is a member", membership_rwq_wp(t)))
    a1 = build_root_system("A", 1)
    c1 = additive_context(a1)
    y = push_pull(c1, 1)
    s = TwistedElement.delta(c1, 1)
    checks.append(("delta_s Y = Y", twisted_mul(s, y) == y))
    f = Cofunction.basis(c1, "", 0) * c1.x_root(a1.negate(0))
    checks.append(("Y . (x_-a f_e) = f_e + f_s", bullet(y, f) == Cofunction.from_values(c1, "", [1, 1])))
    lines = [f"{'PASS' if good else 'FAIL'} {name}" for name, good in checks]
    return lines, all(good for _, good in checks)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        ok = True
        if args.command == "graph":
            lines = cmd_graph(cfg)
        elif args.command == "closed":
            lines, ok = cmd_closed(cfg, args.sweep)
        elif args.command == "sections":
            lines, ok = cmd_sections(cfg, args.basis, args.check)
        elif args.command == "product":
            lines = cmd_product(cfg, args.b, args.c)
        else:
            lines, ok = cmd_selftest(cfg)
    except UsageError as exc:
        print(f"momentgraph: error: {exc}", file=sys.stderr)
        return 1
    except MathDomainError as exc:
        print(f"momentgraph: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"momentgraph: error: {exc}", file=sys.stderr)
        return 1
    for line in lines:
        print(line)
    if args.command == "selftest" and not ok:
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
