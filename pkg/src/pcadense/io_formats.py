"""Serialization: PCAB basis files, PFM/CSV depth maps, sparse-point CSVs,
and key-value camera/pose/scene-parameter text files.

All binary payloads are little-endian.  Basis payloads are f64 (learning
precision); PFM maps are f32 as the format dictates.  See FORMATS.md for
byte-level layouts.
"""

from __future__ import annotations

import io
import os
import struct
import tempfile

import numpy as np

from .errors import (
    BadMagicError,
    InvariantViolationError,
    ParseError,
    TruncatedPayloadError,
    ValidationError,
)
from .geometry import CameraModel, RigidTransform
from .pca import PcaBasis
from .synth import SceneParams, params_from_dict, params_to_dict
from .types import DepthMap, SparseMeasurement

BASIS_MAGIC = b"PCAB"
BASIS_VERSION = 1


def atomic_write(path, data: bytes) -> None:
    """Write via a temp file in the same directory + rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# PCAB basis files


def basis_to_bytes(basis: PcaBasis) -> bytes:
    header = BASIS_MAGIC + struct.pack(
        "<IIII", BASIS_VERSION, basis.width, basis.height, basis.n_components
    )
    buf = io.BytesIO()
    buf.write(header)
    buf.write(struct.pack("<d", basis.total_variance))
    buf.write(basis.mean.astype("<f8").tobytes())
    buf.write(basis.eigenvalues.astype("<f8").tobytes())
    # column-major: each eigenvector contiguous, truncation = file prefix
    buf.write(np.asfortranarray(basis.basis).astype("<f8").tobytes(order="F"))
    return buf.getvalue()


def save_basis(basis: PcaBasis, path) -> None:
    atomic_write(path, basis_to_bytes(basis))


def basis_from_bytes(data: bytes, source: str = "<bytes>") -> PcaBasis:
    if len(data) < 4 or data[:4] != BASIS_MAGIC:
        raise BadMagicError(f"{source}: not a PCAB file")
    if len(data) < 28:
        raise TruncatedPayloadError(f"{source}: header truncated")
    version, width, height, l = struct.unpack("<IIII", data[4:20])
    if version != BASIS_VERSION:
        raise BadMagicError(f"{source}: unsupported PCAB version {version}")
    (total_variance,) = struct.unpack("<d", data[20:28])
    s = width * height
    if width < 1 or height < 1 or l < 1 or s > len(data):
        raise TruncatedPayloadError(f"{source}: implausible declared sizes")
    need = 28 + 8 * (s + l + s * l)
    if len(data) < need:
        raise TruncatedPayloadError(
            f"{source}: payload is {len(data)} bytes, header declares {need}"
        )
    off = 28
    mean = np.frombuffer(data, dtype="<f8", count=s, offset=off).copy()
    off += 8 * s
    eigenvalues = np.frombuffer(data, dtype="<f8", count=l, offset=off).copy()
    off += 8 * l
    flat = np.frombuffer(data, dtype="<f8", count=s * l, offset=off)
    basis = flat.reshape((s, l), order="F").copy()
    try:
        return PcaBasis(
            width=width,
            height=height,
            mean=mean,
            basis=basis,
            eigenvalues=eigenvalues,
            total_variance=total_variance,
        )
    except ValidationError as exc:
        raise InvariantViolationError(f"{source}: {exc}") from exc


def load_basis(path) -> PcaBasis:
    with open(path, "rb") as f:
        return basis_from_bytes(f.read(), source=str(path))


# ---------------------------------------------------------------------------
# Depth maps: PFM (grayscale 'Pf') and CSV


def depth_to_pfm_bytes(depth: DepthMap) -> bytes:
    header = f"Pf\n{depth.width} {depth.height}\n-1.0\n".encode("ascii")
    # PFM stores the bottom row first; scale -1.0 marks little-endian
    data = np.flipud(depth.values).astype("<f4").tobytes()
    return header + data


def write_depth_pfm(depth: DepthMap, path) -> None:
    atomic_write(path, depth_to_pfm_bytes(depth))


def depth_from_pfm_bytes(data: bytes, source: str = "<bytes>") -> DepthMap:
    stream = io.BytesIO(data)

    def token() -> bytes:
        # whitespace-delimited header token per the PFM convention
        chunk = b""
        ch = stream.read(1)
        while ch.isspace():
            ch = stream.read(1)
        while ch and not ch.isspace():
            chunk += ch
            ch = stream.read(1)
        if not chunk:
            raise TruncatedPayloadError(f"{source}: PFM header truncated")
        return chunk

    tag = token()
    if tag == b"PF":
        raise BadMagicError(f"{source}: color PFM ('PF') is not supported, expected 'Pf'")
    if tag != b"Pf":
        raise BadMagicError(f"{source}: not a PFM file (bad tag {tag!r})")
    try:
        width, height = int(token()), int(token())
        scale = float(token())
    except ValueError as exc:
        raise ParseError(f"{source}: malformed PFM header: {exc}") from exc
    if width < 1 or height < 1 or width * height > 2**28:
        raise ParseError(f"{source}: implausible PFM dimensions {width}x{height}")
    if scale == 0:
        raise ParseError(f"{source}: PFM scale must be nonzero")
    dtype = "<f4" if scale < 0 else ">f4"
    payload = stream.read(4 * width * height)
    if len(payload) < 4 * width * height:
        raise TruncatedPayloadError(
            f"{source}: PFM payload truncated ({len(payload)} bytes)"
        )
    values = np.frombuffer(payload, dtype=dtype).reshape(height, width).astype(np.float64)
    values = np.flipud(values)
    values[~np.isfinite(values)] = np.nan
    return DepthMap(values)


def read_depth_pfm(path) -> DepthMap:
    with open(path, "rb") as f:
        return depth_from_pfm_bytes(f.read(), source=str(path))


def write_depth_csv(depth: DepthMap, path) -> None:
    lines = "\n".join(
        ",".join(repr(float(v)) for v in row) for row in depth.values
    )
    atomic_write(path, (lines + "\n").encode("ascii"))


def read_depth_csv(path) -> DepthMap:
    rows = []
    with open(path, "r", encoding="ascii") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: empty CSV depth map")
    if len({len(r) for r in rows}) != 1:
        raise ParseError(f"{path}: ragged CSV rows")
    return DepthMap(np.asarray(rows, dtype=np.float64))


def read_depth(path, fmt: str = "auto") -> DepthMap:
    if fmt == "auto":
        fmt = "pfm" if str(path).lower().endswith(".pfm") else "csv"
    if fmt == "pfm":
        return read_depth_pfm(path)
    if fmt == "csv":
        return read_depth_csv(path)
    raise ValidationError(f"unsupported depth format {fmt!r}")


def write_depth(depth: DepthMap, path, fmt: str = "auto") -> None:
    if fmt == "auto":
        fmt = "pfm" if str(path).lower().endswith(".pfm") else "csv"
    if fmt == "pfm":
        write_depth_pfm(depth, path)
    elif fmt == "csv":
        write_depth_csv(depth, path)
    else:
        raise ValidationError(f"unsupported depth format {fmt!r}")


# ---------------------------------------------------------------------------
# Sparse measurements: CSV with header row,col,disparity

SPARSE_HEADER = "row,col,disparity"


def write_sparse(sparse: SparseMeasurement, path) -> None:
    lines = [SPARSE_HEADER]
    for r, c, d in zip(sparse.rows, sparse.cols, sparse.disparities):
        lines.append(f"{int(r)},{int(c)},{repr(float(d))}")
    atomic_write(path, ("\n".join(lines) + "\n").encode("ascii"))


def read_sparse(path, width: int, height: int) -> SparseMeasurement:
    """Parse a sparse-point CSV; duplicates are rejected with both line
    numbers.  Bounds are checked against the supplied frame size."""
    rows, cols, disps = [], [], []
    seen = {}
    with open(path, "r", encoding="ascii") as f:
        lines = f.readlines()
    if not lines or lines[0].strip() != SPARSE_HEADER:
        raise ParseError(f"{path}:1: expected header '{SPARSE_HEADER}'")
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
        try:
            r, c, d = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        key = (r, c)
        if key in seen:
            raise ParseError(
                f"{path}:{lineno}: duplicate coordinate ({r},{c}), "
                f"first seen at line {seen[key]}"
            )
        seen[key] = lineno
        rows.append(r)
        cols.append(c)
        disps.append(d)
    return SparseMeasurement(
        width=width,
        height=height,
        rows=np.asarray(rows, dtype=np.int64),
        cols=np.asarray(cols, dtype=np.int64),
        disparities=np.asarray(disps, dtype=np.float64),
    )


# ---------------------------------------------------------------------------
# Evaluation reports


def write_report_csv(report, path) -> None:
    """One row per surviving evaluation point."""
    lines = ["row,col,delta2d,delta3d,uncertainty,ref_depth"]
    unc = report.uncertainty
    for i in range(report.n_points):
        u = "" if unc is None else repr(float(unc[i]))
        lines.append(
            f"{int(report.rows[i])},{int(report.cols[i])},"
            f"{repr(float(report.delta2d[i]))},{repr(float(report.delta3d[i]))},"
            f"{u},{repr(float(report.ref_depth[i]))}"
        )
    atomic_write(path, ("\n".join(lines) + "\n").encode("ascii"))


def write_report_json(report, path) -> None:
    import json

    atomic_write(
        path, (json.dumps(report.summary_dict(), indent=2) + "\n").encode("ascii")
    )


def read_report_json(path) -> dict:
    import json

    with open(path, "r", encoding="ascii") as f:
        return json.load(f)


# ---------------------------------------------------------------------------
# Key-value text: camera, pose, scene parameters


def _read_keyvalues(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _write_keyvalues(path, pairs) -> None:
    text = "".join(f"{k} = {v}\n" for k, v in pairs)
    atomic_write(path, text.encode("utf-8"))


def read_camera(path) -> CameraModel:
    kv = _read_keyvalues(path)
    try:
        return CameraModel(
            fx=float(kv["fx"]),
            fy=float(kv["fy"]),
            cx=float(kv["cx"]),
            cy=float(kv["cy"]),
            baseline=float(kv["baseline"]),
            focal=float(kv["focal"]),
        )
    except KeyError as exc:
        raise ParseError(f"{path}: missing camera field {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_camera(cam: CameraModel, path) -> None:
    _write_keyvalues(
        path,
        [
            ("fx", repr(cam.fx)),
            ("fy", repr(cam.fy)),
            ("cx", repr(cam.cx)),
            ("cy", repr(cam.cy)),
            ("baseline", repr(cam.baseline)),
            ("focal", repr(cam.focal)),
        ],
    )


def read_pose(path) -> RigidTransform:
    kv = _read_keyvalues(path)
    try:
        rot = np.array([float(t) for t in kv["rotation"].split()]).reshape(3, 3)
        trans = np.array([float(t) for t in kv["translation"].split()])
    except KeyError as exc:
        raise ParseError(f"{path}: missing pose field {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        return RigidTransform(rotation=rot, translation=trans)
    except ValidationError as exc:
        raise InvariantViolationError(f"{path}: {exc}") from exc


def write_pose(pose: RigidTransform, path) -> None:
    _write_keyvalues(
        path,
        [
            ("rotation", " ".join(repr(float(v)) for v in pose.rotation.reshape(-1))),
            ("translation", " ".join(repr(float(v)) for v in pose.translation)),
        ],
    )


def read_scene_params(path) -> SceneParams:
    kv = _read_keyvalues(path)
    try:
        return params_from_dict(kv)
    except (ValueError, ValidationError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_scene_params(params: SceneParams, path) -> None:
    _write_keyvalues(path, [(k, repr(v)) for k, v in params_to_dict(params).items()])
