"""Dataset and certificate serialization, content hashing, and the Omega cache.

Datasets and certificates are UTF-8 JSON.  Serialization is canonical (sorted
keys, compact separators, rationals as "num/den" strings), so emitting,
parsing, and re-emitting is byte-stable and content hashes are well defined.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from fractions import Fraction
from typing import Optional

from .errors import ValidationError
from .pipeline import BoundCertificate, GammaWord, SweepRow
from .trackmap import Edge, LiftedGraphMap

FORMAT_VERSION = 1

SWEEP_HEADER = "alpha,n,covol2,systole2,deep_dist2,K,bound_num,bound_den,normalized"


# -- rational scalars --------------------------------------------------------

def _num_out(v):
    if isinstance(v, bool):
        raise ValidationError("booleans are not serializable numbers")
    if isinstance(v, int):
        return v
    f = Fraction(v)
    if f.denominator == 1:
        return int(f)
    return f"{f.numerator}/{f.denominator}"


def _num_in(v):
    if isinstance(v, int):
        return v
    if isinstance(v, str) and "/" in v:
        num, den = v.split("/")
        return Fraction(int(num), int(den))
    raise ValidationError(f"malformed number {v!r}")


# -- datasets ----------------------------------------------------------------

def _map_to_dict(track: LiftedGraphMap) -> dict:
    d = {
        "rank": track.rank,
        "vertices": list(track.vertices),
        "edges": [
            {"name": e.name, "src": e.src, "dst": e.dst, "voltage": list(e.voltage)}
            for e in track.edges
        ],
        "vertex_images": {
            v: [im[0], list(im[1])] for v, im in sorted(track.vertex_images.items())
        },
        "edge_images": {
            e: [[s[0], list(s[1]), s[2]] for s in path]
            for e, path in sorted(track.edge_images.items())
        },
    }
    if track.euler_functional is not None:
        d["euler_functional"] = list(track.euler_functional)
    return d


def _map_from_dict(d: dict, rank: int, inverse: Optional[LiftedGraphMap] = None,
                   metadata: Optional[dict] = None) -> LiftedGraphMap:
    try:
        edges = tuple(
            Edge(e["name"], e["src"], e["dst"], tuple(int(v) for v in e["voltage"]))
            for e in d["edges"]
        )
        vertex_images = {
            v: (im[0], tuple(int(x) for x in im[1]))
            for v, im in d["vertex_images"].items()
        }
        edge_images = {
            e: tuple((s[0], tuple(int(x) for x in s[1]), int(s[2])) for s in path)
            for e, path in d["edge_images"].items()
        }
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"malformed dataset section: {exc}") from exc
    euler = d.get("euler_functional")
    if euler is not None:
        euler = tuple(int(v) for v in euler)
        if len(euler) != rank + 1:
            raise ValidationError("euler_functional must have length rank + 1")
    return LiftedGraphMap(
        rank=rank,
        vertices=tuple(d["vertices"]),
        edges=edges,
        vertex_images=vertex_images,
        edge_images=edge_images,
        inverse=inverse,
        metadata=metadata or {},
        euler_functional=euler,
    )


def dataset_to_dict(track: LiftedGraphMap) -> dict:
    d = {"format_version": FORMAT_VERSION, "metadata": dict(track.metadata)}
    d.update(_map_to_dict(track))
    if track.inverse is not None:
        d["inverse"] = _map_to_dict(track.inverse)
    return d


def dataset_from_dict(d: dict) -> LiftedGraphMap:
    if d.get("format_version") != FORMAT_VERSION:
        raise ValidationError(
            f"unsupported dataset format_version {d.get('format_version')!r}"
        )
    rank = int(d["rank"])
    inverse = None
    if "inverse" in d:
        inv = d["inverse"]
        if int(inv.get("rank", rank)) != rank:
            raise ValidationError("inverse section must share the dataset rank")
        inverse = _map_from_dict(inv, rank)
    return _map_from_dict(d, rank, inverse=inverse, metadata=d.get("metadata", {}))


def canonical_json(d: dict) -> str:
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


def dataset_hash(track: LiftedGraphMap) -> str:
    core = dataset_to_dict(track)
    core.pop("metadata", None)  # provenance notes don't change identity
    return hashlib.sha256(canonical_json(core).encode("utf-8")).hexdigest()


def load_dataset(path: str) -> LiftedGraphMap:
    with open(path, "r", encoding="utf-8") as fh:
        return dataset_from_dict(json.load(fh))


def save_dataset(track: LiftedGraphMap, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(dataset_to_dict(track)))
        fh.write("\n")


# -- certificates ------------------------------------------------------------

def certificate_to_dict(cert: BoundCertificate) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "bound-certificate",
        "alpha": list(cert.alpha),
        "n": cert.n,
        "rank": cert.rank,
        "mu": _num_out(cert.mu),
        "slope_cap": None if cert.slope_cap is None else _num_out(cert.slope_cap),
        "p_max": cert.p_max,
        "safety": cert.safety,
        "epsilon": _num_out(cert.epsilon),
        "box_radius": cert.box_radius,
        "word_radius": cert.word_radius,
        "words": [
            {"coeffs": list(w.coeffs), "x": list(w.x), "y": w.y, "mode": w.mode}
            for w in cert.words
        ],
        "obstacle_hulls": [
            [[_num_out(c) for c in v] for v in hull] for hull in cert.obstacle_hulls
        ],
        "deep_point": list(cert.deep_point),
        "deep_dist2": _num_out(cert.deep_dist2),
        "K": cert.K,
        "bound": _num_out(cert.bound),
        "mode": cert.mode,
        "status": cert.status,
        "dataset_hash": cert.dataset_hash,
        "tool_version": cert.tool_version,
        "diagnostics": list(cert.diagnostics),
        "assumptions": list(cert.assumptions),
    }


def certificate_from_dict(d: dict) -> BoundCertificate:
    if d.get("kind") != "bound-certificate":
        raise ValidationError("not a bound certificate file")
    if d.get("format_version") != FORMAT_VERSION:
        raise ValidationError(
            f"unsupported certificate format_version {d.get('format_version')!r}"
        )
    return BoundCertificate(
        alpha=tuple(int(v) for v in d["alpha"]),
        n=int(d["n"]),
        rank=int(d["rank"]),
        mu=Fraction(_num_in(d["mu"])),
        slope_cap=None if d.get("slope_cap") is None else Fraction(_num_in(d["slope_cap"])),
        p_max=int(d["p_max"]),
        safety=int(d["safety"]),
        epsilon=Fraction(_num_in(d["epsilon"])),
        box_radius=int(d["box_radius"]),
        word_radius=int(d["word_radius"]),
        words=tuple(
            GammaWord(
                tuple(int(c) for c in w["coeffs"]),
                tuple(int(x) for x in w["x"]),
                int(w["y"]),
                w["mode"],
            )
            for w in d["words"]
        ),
        obstacle_hulls=tuple(
            tuple(tuple(_num_in(c) for c in v) for v in hull)
            for hull in d["obstacle_hulls"]
        ),
        deep_point=tuple(int(v) for v in d["deep_point"]),
        deep_dist2=Fraction(_num_in(d["deep_dist2"])),
        K=int(d["K"]),
        bound=Fraction(_num_in(d["bound"])),
        mode=d["mode"],
        status=d["status"],
        dataset_hash=d["dataset_hash"],
        tool_version=d["tool_version"],
        diagnostics=tuple(d.get("diagnostics", ())),
        assumptions=tuple(d.get("assumptions", ())),
    )


def emit_certificate(cert: BoundCertificate) -> str:
    return canonical_json(certificate_to_dict(cert)) + "\n"


def parse_certificate(text: str) -> BoundCertificate:
    return certificate_from_dict(json.loads(text))


# -- sweep tables ------------------------------------------------------------

def sweep_to_csv(rows: list[SweepRow]) -> str:
    lines = [SWEEP_HEADER]
    for row in rows:
        dd = Fraction(row.deep_dist2)
        dd_str = str(dd.numerator) if dd.denominator == 1 else f"{dd.numerator}/{dd.denominator}"
        lines.append(
            ",".join(
                [
                    " ".join(str(v) for v in row.alpha),
                    str(row.n),
                    str(row.covol2),
                    str(row.systole2),
                    dd_str,
                    str(row.K),
                    str(row.bound.numerator),
                    str(row.bound.denominator),
                    row.normalized,
                ]
            )
        )
    return "\n".join(lines) + "\n"


# -- Omega cache -------------------------------------------------------------

class SupportCache:
    """Write-once on-disk cache of support point sets, keyed by dataset hash,
    map label (forward/inverse), and power."""

    def __init__(self, directory: str):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)

    def _path(self, ds_hash: str, label: str, p: int) -> str:
        return os.path.join(self.directory, f"{ds_hash[:24]}_{label}_{p}.json")

    def load(self, ds_hash: str, label: str, p: int) -> Optional[list[tuple[int, ...]]]:
        path = self._path(ds_hash, label, p)
        if not os.path.exists(path):
            return None
        with open(path, "r", encoding="utf-8") as fh:
            return [tuple(pt) for pt in json.load(fh)]

    def store(self, ds_hash: str, label: str, p: int, points) -> None:
        path = self._path(ds_hash, label, p)
        if os.path.exists(path):  # write-once per key
            return
        payload = json.dumps(sorted([list(pt) for pt in points]))
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
