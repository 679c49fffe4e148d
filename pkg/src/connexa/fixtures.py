"""Named example structures shipped with the package."""

from __future__ import annotations

import os

from .connmat import TEStruct
from .docio import load_structure, save_structure
from .errors import DocumentError
from .formalnf import NormalFormId, build_normal_form
from .malgrange import build_hnf
from .scalars import S

FIXTURES_ENV = "CONNEXA_FIXTURES"


def _formal(family, **params):
    def build(nz: int, nt: int) -> TEStruct:
        return build_normal_form(NormalFormId(family, params), nz, nt)

    return build


def _holo(family, **params):
    def build(nz: int, nt: int) -> TEStruct:
        return build_hnf(NormalFormId(family, params), nz, nt)

    return build


FIXTURES = {
    "fminus1": _formal("F1", c=S(1), alpha=S("1/2"), c0=S(2)),
    "fminus1_c0zero": _formal("F1", c=S(1), alpha=S("1/2"), c0=S(0)),
    "f1_r1": _formal("FR", c=S(1), alpha=S("1/2"), r=1),
    "f1_r2": _formal("FR", c=S(1), alpha=S("1/2"), r=2),
    "f1_r3": _formal("FR", c=S(0), alpha=S(1), r=3),
    "nf3_1": _formal("NF3-1", c=S(1), alpha=S(0)),
    "nf3_2": _formal("NF3-2", c=S(0), alpha=S(1)),
    "nf3_3": _formal("NF3-3", c=S(0), alpha=S(0), lam=S("1/2")),
    "nf3_4": _formal("NF3-4", c=S(1), alpha=S("1/3"), lam=S("3/2")),
    "nf3_5": _formal("NF3-5", c=S(0), alpha=S(0), lam=S(1), gamma=S(1)),
    "nf3_6": _formal("NF3-6", c=S(0), alpha=S(0), lam=S(2)),
    "nf3_7": _formal("NF3-7", c=S(0), alpha=S(0), lam=S(1)),
    "nf3_8": _formal("NF3-8", c=S(0), alpha=S(0), lam=S(-1)),
    "nf3_9": _formal("NF3-9", c=S(0), alpha=S(0), lam=S(-2)),
    "mal1": _holo("HNF-MAL1", c=S(0), alpha=S(0), c0=S(1)),
    "mal2_lambda1": _holo("HNF-MAL2", c=S(0), alpha=S(0), c0=S(1), lam=S(1)),
    "mal3": _holo("HNF-MAL3", c=S(0), alpha=S(0), c0=S(1)),
}


def fixture_names() -> list[str]:
    return sorted(FIXTURES)


def build_fixture(name: str, nz: int, nt: int) -> TEStruct:
    try:
        builder = FIXTURES[name]
    except KeyError:
        raise DocumentError(f"unknown fixture {name!r}") from None
    return builder(nz, nt)


def resolve_structure(
    name_or_path: str, nz: int, nt: int, fixtures_dir: str | None = None
) -> TEStruct:
    """A path to a document, a file in the fixtures dir, or a built-in name."""
    if os.path.exists(name_or_path):
        return load_structure(name_or_path)
    search = fixtures_dir or os.environ.get(FIXTURES_ENV)
    if search:
        candidate = os.path.join(search, name_or_path)
        for path in (candidate, candidate + ".json"):
            if os.path.exists(path):
                return load_structure(path)
    if name_or_path in FIXTURES:
        return build_fixture(name_or_path, nz, nt)
    raise DocumentError(f"no such file or fixture: {name_or_path!r}")


def write_fixtures(directory: str, nz: int, nt: int) -> list[str]:
    os.makedirs(directory, exist_ok=True)
    written = []
    for name in fixture_names():
        path = os.path.join(directory, name + ".json")
        save_structure(build_fixture(name, nz, nt), path)
        written.append(path)
    return written
