"""Command line front end.

Three subcommands:

    khbn compute   invariant of one diagram, emitted as json / table / poincare
    khbn verify    structural checks on one diagram or on the bundled table
    khbn sseq      page-by-page dump of the u-adic filtration

A diagram is selected with exactly one of --pd, --braid/--strands, or
--name (an entry of the bundled link table).

Exit status: 0 on success, 1 when a verification fails (the offending
position is printed), 2 on malformed input, 3 when the crossing-count
guard refuses to start (rerun with --force).
"""

import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Tuple

import click

from .brcover import build_e1_complex, verify_theorem_main
from .homology import bigraded_homology, euler_characteristic, verify_triangle
from .khcube import BasepointMissing, ResourceLimit, build_complex
from .laurent import Laurent
from .linkdiag import (Diagram, DiagramError, from_braid, kauffman_jones,
                       load_link_table, parse_pd, render)
from .sseq import filtration_pages, u_adic_filtration, verify_einfty_gr

SCHEMA_VERSION = 1

_K_OF_INVARIANT = {"kh": 1, "bn2": 2, "bn3": 3}

# Table entries presenting the same link; used by `verify reidemeister`.
SAME_LINK_PAIRS: List[Tuple[str, str]] = [
    ("unknot", "kink_pos"),
    ("unknot", "kink_neg"),
    ("unknot", "unknot_r2"),
    ("trefoil_L", "trefoil_L_kink"),
    ("figure8", "knot_4_1"),
    ("figure8", "figure8_stab"),
    ("hopf_pos", "hopf_pos_stab"),
]


def _load_entry(name: str) -> Diagram:
    table = load_link_table()
    if name not in table:
        known = ", ".join(sorted(table))
        raise click.UsageError(f"unknown table entry {name!r}; bundled entries: {known}")
    pd_text, comps = table[name]
    D = parse_pd(pd_text)
    if D.component_count != comps:
        raise AssertionError(f"table entry {name} declares {comps} components,"
                             f" diagram has {D.component_count}")
    return D


def _parse_braid_word(word: str) -> List[int]:
    letters = []
    for tok in word.replace(",", " ").split():
        if not tok:
            continue
        try:
            v = int(tok)
        except ValueError:
            raise click.UsageError(f"braid word letter {tok!r} is not an integer")
        if v == 0:
            raise click.UsageError("braid word letters are nonzero (0 names no generator)")
        letters.append(v)
    return letters


def _resolve_diagram(pd: Optional[str], braid: Optional[str],
                     strands: Optional[int], name: Optional[str]) -> Diagram:
    picked = [x for x in (pd, braid, name) if x is not None]
    if len(picked) != 1:
        raise click.UsageError("pick exactly one of --pd, --braid, --name")
    try:
        if pd is not None:
            return parse_pd(pd)
        if braid is not None:
            if strands is None:
                raise click.UsageError("--braid requires --strands")
            return from_braid(_parse_braid_word(braid), strands)
        return _load_entry(name)
    except DiagramError as e:
        raise click.UsageError(str(e))


def _diagram_hash(D: Diagram) -> str:
    return hashlib.sha256(render(D).encode()).hexdigest()


def _default_basepoint(D: Diagram, basepoint: Optional[int]) -> int:
    return D.arcs[0] if basepoint is None else basepoint


def _poincare_text(f2: Dict[Tuple[int, int], int]) -> str:
    if not f2:
        return "0"
    terms = []
    for (i, j) in sorted(f2):
        parts = []
        if f2[(i, j)] != 1:
            parts.append(str(f2[(i, j)]))
        if i != 0:
            parts.append(f"t^{i}")
        parts.append(f"q^{j}")
        terms.append("*".join(parts))
    return " + ".join(terms)


def _laurent_text(p: Laurent) -> str:
    pairs = p.to_pairs()
    if not pairs:
        return "0"
    out = []
    for exp, c in pairs:
        mag = abs(c)
        body = f"q^{exp}" if mag == 1 else f"{mag}*q^{exp}"
        if not out:
            out.append(body if c > 0 else "-" + body)
        else:
            out.append(("+ " if c > 0 else "- ") + body)
    return " ".join(out)


def _invariant_report(D: Diagram, invariant: str, k: int, reduced: bool,
                      basepoint: Optional[int], decomp) -> dict:
    f2 = decomp.f2_dimensions()
    return {
        "schema_version": SCHEMA_VERSION,
        "diagram": {
            "pd": render(D),
            "sha256": _diagram_hash(D),
            "crossings": D.n,
            "writhe": D.writhe,
            "components": D.component_count,
        },
        "invariant": invariant,
        "k": k,
        "reduced": reduced,
        "basepoint": basepoint,
        "decomposition": decomp.to_json(),
        "f2_dimensions": {f"{i},{j}": d for (i, j), d in sorted(f2.items())},
        "total_dimension": decomp.total_dimension(),
        "poincare": _poincare_text(f2),
        "euler": _laurent_text(euler_characteristic(decomp)),
    }


def _dump_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, separators=(",", ":"))


def _summand_name(t: int, mult: int) -> str:
    base = "F2" if t == 1 else f"F2[u]/u^{t}"
    if mult == 1:
        return base
    return f"({base})^{mult}" if t > 1 else f"F2^{mult}"


def _print_table(report: dict) -> None:
    d = report["diagram"]
    click.echo(f"pd: {d['pd']}")
    flavour = "reduced" if report["reduced"] else "unreduced"
    bp = report["basepoint"]
    extra = f", basepoint {bp}" if bp is not None else ""
    click.echo(f"invariant: {report['invariant']} (k={report['k']}, {flavour}{extra})")
    click.echo(f"crossings: {d['crossings']}  writhe: {d['writhe']}"
               f"  components: {d['components']}")
    click.echo(f"total F2-dimension: {report['total_dimension']}")
    rows = []
    arrows = []
    for key in sorted(report["decomposition"],
                      key=lambda s: tuple(int(x) for x in s.split(","))):
        i, j = (int(x) for x in key.split(","))
        for t_str, mult in sorted(report["decomposition"][key].items(),
                                  key=lambda kv: int(kv[0])):
            t = int(t_str)
            rows.append((f"({i}, {j})", _summand_name(t, mult)))
            if t > 1:
                chain = " -> ".join(f"({i},{j - 2 * s})" for s in range(t))
                arrows.append(chain)
    width = max((len(r[0]) for r in rows), default=8)
    click.echo(f"{'(i, j)':<{width}}  summand")
    for pos, summand in rows:
        click.echo(f"{pos:<{width}}  {summand}")
    for chain in arrows:
        click.echo(f"u-tower: {chain}")
    click.echo(f"poincare: {report['poincare']}")
    click.echo(f"euler: {report['euler']}")


@click.group()
@click.version_option(package_name="khbn")
def main() -> None:
    """Exact homological invariants of links from planar diagrams."""


def _diagram_options(f):
    f = click.option("--name", default=None,
                     help="entry of the bundled link table")(f)
    f = click.option("--strands", type=int, default=None,
                     help="strand count for --braid")(f)
    f = click.option("--braid", default=None,
                     help="comma-separated braid word, e.g. '1,-2,1,-2'")(f)
    f = click.option("--pd", default=None,
                     help="planar diagram text, e.g. 'PD[X(1,4,2,5), ...]'")(f)
    return f


@main.command()
@_diagram_options
@click.option("--invariant", type=click.Choice(list(_K_OF_INVARIANT) + ["bnk", "brcover-e2"]),
              default="bn2", show_default=True)
@click.option("--k", "k_opt", type=int, default=None,
              help="truncation order (only with --invariant bnk)")
@click.option("--reduced", is_flag=True, help="quotient flavour with a marked arc")
@click.option("--basepoint", type=int, default=None,
              help="marked arc; defaults to the lowest arc label")
@click.option("--format", "fmt", type=click.Choice(["json", "table", "poincare"]),
              default="json", show_default=True)
@click.option("--force", is_flag=True, help="lift the 14-crossing guard")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="worker processes for the per-bidegree rank computations")
@click.option("--cache-dir", default=None,
              help="directory of cached reports (also read from KHBN_CACHE_DIR)")
def compute(pd, braid, strands, name, invariant, k_opt, reduced, basepoint,
            fmt, force, jobs, cache_dir) -> None:
    """Compute one invariant of one diagram."""
    D = _resolve_diagram(pd, braid, strands, name)
    if invariant == "brcover-e2":
        if reduced:
            raise click.UsageError("brcover-e2 carries its own marked arc; drop --reduced")
        if k_opt is not None:
            raise click.UsageError("--k does not apply to brcover-e2")
        k = 2
        bp: Optional[int] = _default_basepoint(D, basepoint)
    else:
        if invariant == "bnk":
            if k_opt is None:
                raise click.UsageError("--invariant bnk needs --k")
            if k_opt < 1:
                raise click.UsageError("--k must be a positive integer")
            k = k_opt
        else:
            if k_opt is not None:
                raise click.UsageError("--k only applies to --invariant bnk")
            k = _K_OF_INVARIANT[invariant]
        if basepoint is not None and not reduced:
            raise click.UsageError("--basepoint only makes sense with --reduced")
        bp = _default_basepoint(D, basepoint) if reduced else None

    cache_dir = cache_dir or os.environ.get("KHBN_CACHE_DIR")
    cache_path = None
    report = None
    if cache_dir:
        key = _dump_json({"sha256": _diagram_hash(D), "invariant": invariant,
                          "k": k, "reduced": reduced, "basepoint": bp})
        cache_path = os.path.join(
            cache_dir, hashlib.sha256(key.encode()).hexdigest() + ".json")
        if os.path.exists(cache_path):
            with open(cache_path) as fh:
                report = json.load(fh)
            click.echo(f"cache hit: {cache_path}", err=True)

    if report is None:
        t0 = time.perf_counter()
        try:
            if invariant == "brcover-e2":
                C = build_e1_complex(D, bp)
                if D.n > 14 and not force:
                    raise ResourceLimit(f"{D.n} crossings")
            else:
                C = build_complex(D, k, reduced=reduced, basepoint=bp, force=force)
        except ResourceLimit as e:
            click.echo(f"refused: {e}; rerun with --force", err=True)
            sys.exit(3)
        except BasepointMissing as e:
            raise click.UsageError(str(e))
        decomp = bigraded_homology(C, jobs=max(1, jobs))
        report = _invariant_report(D, invariant, k, reduced, bp, decomp)
        click.echo(f"computed in {time.perf_counter() - t0:.3f}s", err=True)
        if cache_path:
            os.makedirs(cache_dir, exist_ok=True)
            with open(cache_path, "w") as fh:
                fh.write(_dump_json(report) + "\n")

    if fmt == "json":
        click.echo(_dump_json(report))
    elif fmt == "poincare":
        click.echo(report["poincare"])
        click.echo(f"euler: {report['euler']}")
    else:
        _print_table(report)


# ---------------------------------------------------------------- verify --

def _check_euler(D: Diagram, k: int) -> Tuple[bool, str]:
    M = bigraded_homology(build_complex(D, k, force=True))
    chi = euler_characteristic(M)
    expect = kauffman_jones(D) * Laurent({-2 * s: 1 for s in range(k)})
    if chi == expect:
        return True, f"chi = (1+...+q^-{2 * (k - 1)})*V" if k > 1 else "chi = V"
    return False, f"chi = {_laurent_text(chi)} but state sum gives {_laurent_text(expect)}"


def _check_triangle(D: Diagram, reduced: bool, basepoint: Optional[int]) -> Tuple[bool, str]:
    bp = _default_basepoint(D, basepoint) if reduced else None
    rep = verify_triangle(D, reduced=reduced, basepoint=bp)
    if rep.passed:
        return True, f"{len(rep.nodes)} nodes exact"
    return False, f"exactness fails at {rep.failures[0]}"


def _check_splitting(D: Diagram, k: int) -> Tuple[bool, str]:
    un = bigraded_homology(build_complex(D, k, force=True))
    red = bigraded_homology(build_complex(
        D, k, reduced=True, basepoint=D.arcs[0], force=True))
    lhs = un.f2_dimensions()
    rhs: Dict[Tuple[int, int], int] = {}
    for (i, j), d in red.f2_dimensions().items():
        rhs[(i, j)] = rhs.get((i, j), 0) + d
        rhs[(i, j - 2)] = rhs.get((i, j - 2), 0) + d
    rhs = {bd: d for bd, d in rhs.items() if d}
    if lhs == rhs:
        return True, "unreduced = reduced (x) (1 + q^-2)"
    bad = sorted(set(lhs) ^ set(rhs) | {bd for bd in set(lhs) & set(rhs)
                                        if lhs[bd] != rhs[bd]})
    return False, f"dimension mismatch at {bad[0]}"


def _sample_arcs(D: Diagram, limit: int = 8) -> List[int]:
    arcs = list(D.arcs)
    if len(arcs) <= limit:
        return arcs
    step = max(1, len(arcs) // limit)
    return arcs[::step][:limit]


def _check_basepoint(D: Diagram, k: int) -> Tuple[bool, str]:
    arcs = _sample_arcs(D)
    first = bigraded_homology(build_complex(
        D, k, reduced=True, basepoint=arcs[0], force=True))
    for a in arcs[1:]:
        other = bigraded_homology(build_complex(
            D, k, reduced=True, basepoint=a, force=True))
        if other != first:
            return False, f"arc {arcs[0]} and arc {a} give different answers"
    return True, f"{len(arcs)} arcs agree"


def _check_brcover(D: Diagram, basepoint: Optional[int]) -> Tuple[bool, str]:
    rep = verify_theorem_main(D, basepoint=_default_basepoint(D, basepoint))
    if rep.passed:
        return True, f"{rep.edges_checked} edges intertwined, modules agree"
    if rep.chain_failures:
        return False, f"edge map mismatch at {rep.chain_failures[0]}"
    return False, f"module mismatch: {rep.module_failures[0]}"


def _check_sseq(D: Diagram, k: int, reduced: bool,
                basepoint: Optional[int]) -> Tuple[bool, str]:
    bp = _default_basepoint(D, basepoint) if reduced else None
    C = build_complex(D, k, reduced=reduced, basepoint=bp, force=True)
    M = bigraded_homology(C)
    for j, F in sorted(u_adic_filtration(C).items()):
        rep = verify_einfty_gr(F, M)
        if not rep.passed:
            return False, f"E_inf != gr at quantum {j}: {rep.mismatches[0]}"
    return True, "E_inf = gr(H) at every position"


def _check_reidemeister(pair: Tuple[str, str], k: int, reduced: bool) -> Tuple[bool, str]:
    decomps = []
    for nm in pair:
        D = _load_entry(nm)
        bp = D.arcs[0] if reduced else None
        decomps.append(bigraded_homology(
            build_complex(D, k, reduced=reduced, basepoint=bp, force=True)))
    if decomps[0] == decomps[1]:
        return True, "same module decomposition"
    only = sorted(set(decomps[0].table) ^ set(decomps[1].table))
    where = only[0] if only else "tower multiplicities"
    return False, f"{pair[0]} and {pair[1]} disagree at {where}"


CHECKS = ["euler", "triangle", "splitting", "basepoint", "brcover", "sseq",
          "reidemeister"]


def _run_check(check: str, label: str, pd_text: str, k: int, reduced: bool,
               basepoint: Optional[int]) -> Tuple[str, bool, str]:
    D = parse_pd(pd_text)
    if check == "euler":
        ok, detail = _check_euler(D, k)
    elif check == "triangle":
        ok, detail = _check_triangle(D, reduced, basepoint)
    elif check == "splitting":
        ok, detail = _check_splitting(D, k)
    elif check == "basepoint":
        ok, detail = _check_basepoint(D, k)
    elif check == "brcover":
        ok, detail = _check_brcover(D, basepoint)
    else:
        ok, detail = _check_sseq(D, k, reduced, basepoint)
    return label, ok, detail


def _run_check_star(args):
    return _run_check(*args)


@main.command()
@click.argument("check", type=click.Choice(CHECKS))
@_diagram_options
@click.option("--all-table", is_flag=True, help="run over every bundled entry")
@click.option("--max-crossings", type=int, default=None,
              help="skip table entries above this size")
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--reduced", is_flag=True,
              help="reduced flavour where the check admits one")
@click.option("--basepoint", type=int, default=None)
@click.option("--jobs", type=int, default=1, show_default=True,
              help="worker processes across table entries")
@click.option("--force", is_flag=True, help="lift the 14-crossing guard")
def verify(check, pd, braid, strands, name, all_table, max_crossings, k,
           reduced, basepoint, jobs, force) -> None:
    """Run one structural check; exit 1 with a counterexample on failure."""
    if k < 1:
        raise click.UsageError("--k must be a positive integer")

    if check == "reidemeister":
        if pd or braid:
            raise click.UsageError(
                "reidemeister compares bundled same-link pairs; use --all-table or --name")
        pairs = SAME_LINK_PAIRS
        if name:
            pairs = [p for p in pairs if name in p]
            if not pairs:
                raise click.UsageError(f"no bundled same-link pair involves {name!r}")
        elif not all_table:
            raise click.UsageError("reidemeister needs --all-table or --name")
        if max_crossings is not None:
            pairs = [p for p in pairs
                     if max(_load_entry(nm).n for nm in p) <= max_crossings]
        failures = []
        for pair in pairs:
            ok, detail = _check_reidemeister(pair, k, reduced)
            mark = "ok" if ok else "FAIL"
            click.echo(f"{mark} {pair[0]} ~ {pair[1]}: {detail}")
            if not ok:
                failures.append(pair)
        _finish(len(pairs), failures)
        return

    if all_table:
        if pd or braid or name:
            raise click.UsageError("--all-table excludes --pd/--braid/--name")
        table = load_link_table()
        targets = []
        for nm in sorted(table):
            D = parse_pd(table[nm][0])
            if max_crossings is not None and D.n > max_crossings:
                continue
            if D.n > 14 and not force:
                click.echo(f"skip {nm}: {D.n} crossings (use --force)", err=True)
                continue
            targets.append((check, nm, table[nm][0], k, reduced, basepoint))
    else:
        D = _resolve_diagram(pd, braid, strands, name)
        if D.n > 14 and not force:
            click.echo(f"refused: {D.n} crossings; rerun with --force", err=True)
            sys.exit(3)
        label = name if name else render(D)
        targets = [(check, label, render(D), k, reduced, basepoint)]

    results = []
    if jobs > 1 and len(targets) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_check_star, targets))
    else:
        for t in targets:
            results.append(_run_check_star(t))

    failures = []
    for label, ok, detail in results:
        click.echo(f"{'ok' if ok else 'FAIL'} {label}: {detail}")
        if not ok:
            failures.append(label)
    _finish(len(results), failures)


def _finish(total: int, failures: list) -> None:
    if failures:
        click.echo(f"{total} run, {len(failures)} failed")
        click.echo(f"counterexample: {failures[0]}")
        sys.exit(1)
    click.echo(f"{total} run, all passed")


# ------------------------------------------------------------------ sseq --

@main.command("sseq")
@_diagram_options
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--reduced", is_flag=True)
@click.option("--basepoint", type=int, default=None)
@click.option("--force", is_flag=True, help="lift the 14-crossing guard")
def sseq_cmd(pd, braid, strands, name, k, reduced, basepoint, force) -> None:
    """Dump E_0..E_stab of the u-adic filtration, one block per quantum degree."""
    if k < 1:
        raise click.UsageError("--k must be a positive integer")
    D = _resolve_diagram(pd, braid, strands, name)
    bp = _default_basepoint(D, basepoint) if reduced else None
    try:
        C = build_complex(D, k, reduced=reduced, basepoint=bp, force=force)
    except ResourceLimit as e:
        click.echo(f"refused: {e}; rerun with --force", err=True)
        sys.exit(3)
    except BasepointMissing as e:
        raise click.UsageError(str(e))
    M = bigraded_homology(C)
    flavour = "reduced" if reduced else "unreduced"
    click.echo(f"pd: {render(D)}")
    click.echo(f"filtration of the k={k} complex, {flavour}")
    all_ok = True
    for j, F in sorted(u_adic_filtration(C).items()):
        table = filtration_pages(F)
        click.echo(f"quantum {j}: stabilizes at r={table.r_stab},"
                   f" E_inf total {table.page_total(len(table.pages) - 1)}")
        for r in range(table.r_stab + 1):
            cells = ", ".join(f"({p},{q})={d}"
                              for (p, q), d in sorted(table.pages[r].items()) if d)
            click.echo(f"  E_{r}: total={table.page_total(r)}"
                       + (f"  {cells}" if cells else "  empty"))
        rep = verify_einfty_gr(F, M, table)
        click.echo(f"  E_inf vs gr(H): {'ok' if rep.passed else 'MISMATCH'}"
                   f" ({rep.checked} positions)")
        if not rep.passed:
            click.echo(f"  first mismatch: {rep.mismatches[0]}")
            all_ok = False
    if not all_ok:
        sys.exit(1)


if __name__ == "__main__":
    main()
