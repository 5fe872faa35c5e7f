"""Plain EDF reader/writer and the columnar text interchange format.

Only the original (non-plus) EDF layout is handled: a 256-byte main header,
256 bytes of per-signal header, then ``num_records`` data records of 16-bit
little-endian two's complement samples.
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from anxeeg.errors import ColumnarFormatError, EdfFormatError
from anxeeg.recording import Recording

MAIN_HEADER_BYTES = 256
SIGNAL_HEADER_BYTES = 256

_MAIN_FIELDS = (
    ("version", 8),
    ("patient_id", 80),
    ("recording_id", 80),
    ("start_date", 8),
    ("start_time", 8),
    ("header_bytes", 8),
    ("reserved", 44),
    ("num_records", 8),
    ("record_duration", 8),
    ("num_signals", 4),
)

_SIGNAL_FIELDS = (
    ("label", 16),
    ("transducer", 80),
    ("physical_dim", 8),
    ("physical_min", 8),
    ("physical_max", 8),
    ("digital_min", 8),
    ("digital_max", 8),
    ("prefiltering", 80),
    ("samples_per_record", 8),
    ("reserved", 32),
)

ANNOTATION_LABEL = "EDF Annotations"


@dataclass(frozen=True)
class EdfHeader:
    version: str
    patient_id: str
    recording_id: str
    start_date: str
    start_time: str
    header_bytes: int
    num_records: int
    record_duration: float
    num_signals: int
    reserved: str = ""


@dataclass(frozen=True)
class SignalHeader:
    label: str
    transducer: str
    physical_dim: str
    physical_min: float
    physical_max: float
    digital_min: int
    digital_max: int
    prefiltering: str
    samples_per_record: int
    reserved: str = ""

    @property
    def gain(self) -> float:
        return (self.physical_max - self.physical_min) / (self.digital_max - self.digital_min)

    def to_physical(self, digital: np.ndarray) -> np.ndarray:
        digital = np.asarray(digital, dtype=np.float64)
        out = self.physical_min + (digital - self.digital_min) * self.gain
        # Pin the range endpoints so decode(digital_min/max) is exact.
        out[digital == self.digital_min] = self.physical_min
        out[digital == self.digital_max] = self.physical_max
        return out

    def to_digital(self, physical: np.ndarray) -> np.ndarray:
        physical = np.asarray(physical, dtype=np.float64)
        d = np.rint((physical - self.physical_min) / self.gain + self.digital_min)
        return np.clip(d, self.digital_min, self.digital_max).astype("<i2")


def _text(raw: bytes) -> str:
    return raw.decode("ascii", errors="replace").rstrip(" \x00")


def _number(raw: bytes, name: str, kind: type) -> int | float:
    text = _text(raw).strip()
    try:
        if kind is int:
            return int(text)
        value = float(text)
    except ValueError:
        raise EdfFormatError(f"non-numeric value {text!r} in field {name}") from None
    if not math.isfinite(value):
        raise EdfFormatError(f"non-finite value {text!r} in field {name}")
    return value


def _parse_main_header(buf: bytes) -> EdfHeader:
    raw: dict[str, bytes] = {}
    pos = 0
    for name, width in _MAIN_FIELDS:
        raw[name] = buf[pos:pos + width]
        pos += width
    return EdfHeader(
        version=_text(raw["version"]),
        patient_id=_text(raw["patient_id"]),
        recording_id=_text(raw["recording_id"]),
        start_date=_text(raw["start_date"]),
        start_time=_text(raw["start_time"]),
        header_bytes=_number(raw["header_bytes"], "header_bytes", int),
        num_records=_number(raw["num_records"], "num_records", int),
        record_duration=_number(raw["record_duration"], "record_duration", float),
        num_signals=_number(raw["num_signals"], "num_signals", int),
        reserved=_text(raw["reserved"]),
    )


def _parse_signal_headers(buf: bytes, ns: int) -> list[SignalHeader]:
    columns: dict[str, list[bytes]] = {}
    pos = 0
    for name, width in _SIGNAL_FIELDS:
        columns[name] = [buf[pos + i * width:pos + (i + 1) * width] for i in range(ns)]
        pos += width * ns
    out = []
    for i in range(ns):
        c = {k: v[i] for k, v in columns.items()}
        sh = SignalHeader(
            label=_text(c["label"]).strip(),
            transducer=_text(c["transducer"]),
            physical_dim=_text(c["physical_dim"]),
            physical_min=_number(c["physical_min"], "physical_min", float),
            physical_max=_number(c["physical_max"], "physical_max", float),
            digital_min=_number(c["digital_min"], "digital_min", int),
            digital_max=_number(c["digital_max"], "digital_max", int),
            prefiltering=_text(c["prefiltering"]),
            samples_per_record=_number(c["samples_per_record"], "samples_per_record", int),
            reserved=_text(c["reserved"]),
        )
        _check_signal_header(sh)
        out.append(sh)
    return out


def _check_signal_header(sh: SignalHeader) -> None:
    if sh.label == ANNOTATION_LABEL:
        raise EdfFormatError("EDF+ annotation signals are not supported")
    if not sh.digital_min < sh.digital_max:
        raise EdfFormatError(f"signal {sh.label!r}: digital_min must be < digital_max")
    if sh.physical_min == sh.physical_max:
        raise EdfFormatError(f"signal {sh.label!r}: physical_min equals physical_max")
    if sh.samples_per_record < 1:
        raise EdfFormatError(f"signal {sh.label!r}: samples_per_record must be >= 1")
    if sh.digital_min < -32768 or sh.digital_max > 32767:
        raise EdfFormatError(f"signal {sh.label!r}: digital range exceeds 16 bits")


def parse_edf_headers(data: bytes) -> tuple[EdfHeader, list[SignalHeader]]:
    if len(data) < MAIN_HEADER_BYTES:
        raise EdfFormatError("truncated file: main header incomplete")
    header = _parse_main_header(data[:MAIN_HEADER_BYTES])
    if header.num_signals < 1:
        raise EdfFormatError("file declares no signals")
    expected = MAIN_HEADER_BYTES + SIGNAL_HEADER_BYTES * header.num_signals
    if header.header_bytes != expected:
        raise EdfFormatError(
            f"header size mismatch: declared {header.header_bytes}, expected {expected}"
        )
    if len(data) < header.header_bytes:
        raise EdfFormatError("truncated file: signal headers incomplete")
    if header.num_records == -1:
        raise EdfFormatError("unknown number of data records (-1) is not supported")
    if header.num_records < 1:
        raise EdfFormatError(f"invalid number of data records: {header.num_records}")
    if not header.record_duration > 0:
        raise EdfFormatError("record_duration must be positive")
    signals = _parse_signal_headers(data[MAIN_HEADER_BYTES:header.header_bytes],
                                    header.num_signals)
    return header, signals


def parse_edf(data: bytes, subject_id: str = "") -> Recording:
    """Decode a complete EDF byte stream into a :class:`Recording`.

    All signals must share one sampling rate; mixed-rate files are rejected
    rather than resampled.
    """
    header, signals = parse_edf_headers(data)
    spr = {s.samples_per_record for s in signals}
    if len(spr) != 1:
        raise EdfFormatError(
            "signals with differing sample rates: "
            + ", ".join(f"{s.label}={s.samples_per_record / header.record_duration:g}Hz"
                        for s in signals)
        )
    n_per_record = spr.pop()
    ns = header.num_signals
    record_len = n_per_record * ns
    needed = header.header_bytes + 2 * record_len * header.num_records
    if len(data) < needed:
        raise EdfFormatError(
            f"truncated file: {len(data)} bytes, data section needs {needed}"
        )
    samples = np.frombuffer(data, dtype="<i2", count=record_len * header.num_records,
                            offset=header.header_bytes)
    # records x signals x samples -> signals x (records * samples)
    digital = samples.reshape(header.num_records, ns, n_per_record)
    digital = digital.transpose(1, 0, 2).reshape(ns, -1)
    physical = np.vstack([sh.to_physical(digital[i]) for i, sh in enumerate(signals)])
    labels = [s.label for s in signals]
    if len(set(labels)) != len(labels):
        raise EdfFormatError("duplicate signal labels")
    return Recording(
        channels=tuple(labels),
        sample_rate=n_per_record / header.record_duration,
        data=physical,
        subject_id=subject_id or header.patient_id.split(" ")[0],
        meta={"edf_header": header, "signal_headers": tuple(signals)},
    )


def read_edf(path: str | Path, subject_id: str = "") -> Recording:
    path = Path(path)
    return parse_edf(path.read_bytes(), subject_id=subject_id or path.stem)


def _fit(value: str, width: int, name: str) -> bytes:
    if len(value) > width:
        raise EdfFormatError(f"value {value!r} does not fit the {width}-byte field {name}")
    return value.ljust(width).encode("ascii")


def _format_number(value: float, width: int) -> str:
    if float(value).is_integer() and abs(value) < 10 ** (width - 1):
        return str(int(value))
    for precision in range(width, 0, -1):
        text = f"{value:.{precision}g}"
        if len(text) <= width:
            return text
    raise EdfFormatError(f"cannot format {value} in {width} characters")


def _default_signal_header(label: str, x: np.ndarray, spr: int) -> SignalHeader:
    lo = float(np.min(x)) if x.size else -1.0
    hi = float(np.max(x)) if x.size else 1.0
    # Round outward to something that formats in 8 characters.
    lo = math.floor(lo) - 1.0
    hi = math.ceil(hi) + 1.0
    return SignalHeader(label, "", "uV", lo, hi, -32768, 32767, "", spr)


def write_edf(rec: Recording) -> bytes:
    """Encode a recording as EDF.

    Header metadata captured by :func:`parse_edf` is reused so that
    ``parse_edf(write_edf(parse_edf(f)))`` reproduces every parsed field.
    """
    meta_header: EdfHeader | None = rec.meta.get("edf_header")
    meta_signals = rec.meta.get("signal_headers")
    ns = len(rec.channels)
    n = rec.n_samples
    if meta_header is not None and meta_signals is not None and len(meta_signals) == ns:
        signals = [replace(s, label=c) for s, c in zip(meta_signals, rec.channels)]
        spr = signals[0].samples_per_record
        record_duration = meta_header.record_duration
        if n % spr:
            raise EdfFormatError("sample count is not a whole number of data records")
        header = replace(meta_header, num_records=n // spr, num_signals=ns,
                         header_bytes=MAIN_HEADER_BYTES + SIGNAL_HEADER_BYTES * ns)
    else:
        fs = rec.sample_rate
        if float(fs).is_integer() and n % int(fs) == 0:
            spr, record_duration = int(fs), 1.0
        else:
            spr, record_duration = n, n / fs
        signals = [_default_signal_header(c, rec.data[i], spr)
                   for i, c in enumerate(rec.channels)]
        header = EdfHeader(
            version="0", patient_id=rec.subject_id or "X", recording_id="X",
            start_date="01.01.00", start_time="00.00.00",
            header_bytes=MAIN_HEADER_BYTES + SIGNAL_HEADER_BYTES * ns,
            num_records=n // spr, record_duration=record_duration, num_signals=ns,
        )
    for s in signals:
        _check_signal_header(s)

    out = io.BytesIO()
    h = asdict(header)
    for name, width in _MAIN_FIELDS:
        value = h[name]
        text = _format_number(value, width) if isinstance(value, (int, float)) else value
        out.write(_fit(text, width, name))
    for name, width in _SIGNAL_FIELDS:
        for s in signals:
            value = getattr(s, name)
            text = _format_number(value, width) if isinstance(value, (int, float)) else value
            out.write(_fit(text, width, name))
    digital = np.vstack([s.to_digital(rec.data[i]) for i, s in enumerate(signals)])
    records = digital.reshape(ns, header.num_records, spr).transpose(1, 0, 2)
    out.write(np.ascontiguousarray(records, dtype="<i2").tobytes())
    return out.getvalue()


# -- columnar text format ---------------------------------------------------

_TOKEN = re.compile(r"(\w+)=(\S*)")


def write_columnar(rec: Recording, extra: dict[str, str] | None = None) -> bytes:
    """One ``#channels=.. rate=.. subject=..`` line, then one row per sample."""
    if not rec.channels:
        raise ColumnarFormatError("empty channel list")
    for c in rec.channels:
        if "," in c or any(ch.isspace() for ch in c):
            raise ColumnarFormatError(f"channel name {c!r} cannot contain commas or spaces")
    if any(ch.isspace() for ch in rec.subject_id):
        raise ColumnarFormatError("subject id cannot contain whitespace")
    fields = {
        "channels": ",".join(rec.channels),
        "rate": repr(rec.sample_rate),
        "subject": rec.subject_id,
    }
    if rec.transient:
        fields["transient"] = str(rec.transient)
    fields.update(extra or {})
    buf = io.StringIO()
    buf.write("#" + " ".join(f"{k}={v}" for k, v in fields.items()) + "\n")
    np.savetxt(buf, rec.data.T, fmt="%.17g", delimiter=" ")
    return buf.getvalue().encode("ascii")


def read_columnar_header(line: str) -> dict[str, str]:
    if not line.startswith("#"):
        raise ColumnarFormatError("malformed header line: missing '#'")
    fields = dict(_TOKEN.findall(line[1:]))
    for key in ("channels", "rate", "subject"):
        if key not in fields:
            raise ColumnarFormatError(f"malformed header line: missing {key}=")
    return fields


def read_columnar(data: bytes) -> Recording:
    text = data.decode("ascii")
    first, _, body = text.partition("\n")
    fields = read_columnar_header(first)
    channels = tuple(c for c in fields["channels"].split(",") if c)
    if not channels:
        raise ColumnarFormatError("empty channel list")
    try:
        rate = float(fields["rate"])
    except ValueError:
        raise ColumnarFormatError(f"malformed rate {fields['rate']!r}") from None
    rows = [r.split() for r in body.splitlines() if r.strip()]
    for i, r in enumerate(rows):
        if len(r) != len(channels):
            raise ColumnarFormatError(
                f"ragged row {i + 1}: {len(r)} values for {len(channels)} channels"
            )
    try:
        values = np.array(rows, dtype=np.float64).reshape(len(rows), len(channels))
    except ValueError as exc:
        raise ColumnarFormatError(f"non-numeric sample: {exc}") from None
    meta = {k: v for k, v in fields.items() if k not in ("channels", "rate", "subject")}
    return Recording(channels, rate, values.T, fields["subject"], meta=meta,
                     transient=int(meta.pop("transient", 0)))

