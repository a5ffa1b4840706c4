"""Media probing and deterministic placeholder synthesis.

The environment deliberately has no ffmpeg dependency: images are probed
with Pillow, WAV with the stdlib, and MP4 with a minimal ISO-BMFF box
reader that understands ``moov/mvhd`` (duration) and ``trak/tkhd``
(dimensions).  The same module writes the stub MP4/WAV/PNG files the mock
provider emits, so every generated asset round-trips through the same
probe path as ingested media.
"""

from __future__ import annotations

import io
import struct
import wave
from dataclasses import dataclass
from pathlib import Path

from PIL import Image, PngImagePlugin

from .errors import MediaProbeError

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}
VIDEO_SUFFIXES = {".mp4"}
AUDIO_SUFFIXES = {".wav", ".mp3"}
SUPPORTED_SUFFIXES = IMAGE_SUFFIXES | VIDEO_SUFFIXES | AUDIO_SUFFIXES


@dataclass
class MediaInfo:
    kind: str  # image | video | audio
    width: int | None = None
    height: int | None = None
    duration_s: float | None = None


def probe(path: str | Path) -> MediaInfo:
    """Identify a media file and extract dimensions / duration."""
    path = Path(path)
    try:
        head = path.open("rb").read(16)
    except OSError as exc:
        raise MediaProbeError(f"cannot read {path}: {exc}") from exc
    if not head:
        raise MediaProbeError(f"empty file: {path}")

    if head.startswith(b"\x89PNG") or head.startswith(b"\xff\xd8"):
        return _probe_image(path)
    if head.startswith(b"RIFF") and head[8:12] == b"WAVE":
        return _probe_wav(path)
    if len(head) >= 12 and head[4:8] == b"ftyp":
        return _probe_mp4(path)
    if head.startswith(b"ID3") or (head[0] == 0xFF and (head[1] & 0xE0) == 0xE0):
        return _probe_mp3(path)
    raise MediaProbeError(f"unrecognized media format: {path.name}")


def _probe_image(path: Path) -> MediaInfo:
    try:
        with Image.open(path) as img:
            width, height = img.size
    except Exception as exc:
        raise MediaProbeError(f"not a readable image: {path.name}: {exc}") from exc
    return MediaInfo(kind="image", width=width, height=height)


def _probe_wav(path: Path) -> MediaInfo:
    try:
        with wave.open(str(path), "rb") as wav:
            frames = wav.getnframes()
            rate = wav.getframerate()
    except (wave.Error, EOFError, OSError) as exc:
        raise MediaProbeError(f"not a readable wav: {path.name}: {exc}") from exc
    if rate <= 0:
        raise MediaProbeError(f"wav with zero sample rate: {path.name}")
    return MediaInfo(kind="audio", duration_s=frames / rate)


# MPEG1 layer III bitrate table (kbps); index 0 is "free", 15 invalid.
_MP3_BITRATES = [0, 32, 40, 48, 56, 64, 80, 96, 112, 128, 160, 192, 224, 256, 320]


def _probe_mp3(path: Path) -> MediaInfo:
    data = path.read_bytes()
    offset = 0
    if data.startswith(b"ID3") and len(data) > 10:
        size = ((data[6] & 0x7F) << 21) | ((data[7] & 0x7F) << 14) | ((data[8] & 0x7F) << 7) | (data[9] & 0x7F)
        offset = 10 + size
    # scan for a frame sync
    while offset < len(data) - 4:
        if data[offset] == 0xFF and (data[offset + 1] & 0xE0) == 0xE0:
            break
        offset += 1
    else:
        raise MediaProbeError(f"no mp3 frame sync found: {path.name}")
    bitrate_idx = (data[offset + 2] >> 4) & 0x0F
    if bitrate_idx == 0 or bitrate_idx >= len(_MP3_BITRATES):
        raise MediaProbeError(f"unsupported mp3 bitrate index: {path.name}")
    bitrate = _MP3_BITRATES[bitrate_idx] * 1000
    # CBR estimate; good enough for rough-cut timing of ingested music beds
    duration = (len(data) - offset) * 8 / bitrate
    return MediaInfo(kind="audio", duration_s=duration)


# ---------------------------------------------------------------------------
# Minimal ISO-BMFF reader / writer


def _iter_boxes(data: bytes, start: int, end: int):
    pos = start
    while pos + 8 <= end:
        size = struct.unpack(">I", data[pos : pos + 4])[0]
        box_type = data[pos + 4 : pos + 8]
        if size == 1:  # 64-bit largesize
            if pos + 16 > end:
                return
            size = struct.unpack(">Q", data[pos + 8 : pos + 16])[0]
        elif size == 0:  # box extends to end
            size = end - pos
        if size < 8 or pos + size > end:
            return
        yield box_type, pos + 8, pos + size
        pos += size


def _probe_mp4(path: Path) -> MediaInfo:
    data = path.read_bytes()
    duration = None
    width = None
    height = None
    for box_type, body, box_end in _iter_boxes(data, 0, len(data)):
        if box_type != b"moov":
            continue
        for child, cbody, cend in _iter_boxes(data, body, box_end):
            if child == b"mvhd":
                version = data[cbody]
                if version == 1:
                    timescale = struct.unpack(">I", data[cbody + 20 : cbody + 24])[0]
                    dur = struct.unpack(">Q", data[cbody + 24 : cbody + 32])[0]
                else:
                    timescale = struct.unpack(">I", data[cbody + 12 : cbody + 16])[0]
                    dur = struct.unpack(">I", data[cbody + 16 : cbody + 20])[0]
                if timescale:
                    duration = dur / timescale
            elif child == b"trak":
                for gchild, gbody, gend in _iter_boxes(data, cbody, cend):
                    if gchild != b"tkhd":
                        continue
                    # width/height are the trailing 16.16 fixed-point fields
                    w_off = gend - 8
                    w = struct.unpack(">I", data[w_off : w_off + 4])[0] >> 16
                    h = struct.unpack(">I", data[w_off + 4 : w_off + 8])[0] >> 16
                    if w and h:
                        width, height = w, h
    if duration is None:
        raise MediaProbeError(f"mp4 without moov/mvhd: {path.name}")
    return MediaInfo(kind="video", width=width, height=height, duration_s=duration)


def _box(box_type: bytes, payload: bytes) -> bytes:
    return struct.pack(">I", 8 + len(payload)) + box_type + payload


def write_stub_mp4(duration_s: float, width: int, height: int, payload: bytes = b"") -> bytes:
    """Build a minimal MP4 container carrying only timing/dimension metadata.

    Not playable by real decoders; exists so the asset pipeline has video
    files that probe correctly without a codec stack.
    """
    timescale = 1000
    duration = max(0, round(duration_s * timescale))
    mvhd = _box(
        b"mvhd",
        struct.pack(">B3x", 0)  # version 0
        + struct.pack(">II", 0, 0)  # creation / modification (fixed: determinism)
        + struct.pack(">II", timescale, duration)
        + struct.pack(">I", 0x00010000)  # rate 1.0
        + struct.pack(">H", 0x0100)  # volume 1.0
        + b"\x00" * 10
        + _IDENTITY_MATRIX
        + b"\x00" * 24
        + struct.pack(">I", 2),  # next track id
    )
    tkhd = _box(
        b"tkhd",
        struct.pack(">B3x", 0)
        + struct.pack(">II", 0, 0)
        + struct.pack(">I", 1)  # track id
        + b"\x00" * 4
        + struct.pack(">I", duration)
        + b"\x00" * 8
        + struct.pack(">HHH", 0, 0, 0)
        + b"\x00" * 2
        + _IDENTITY_MATRIX
        + struct.pack(">II", width << 16, height << 16),
    )
    moov = _box(b"moov", mvhd + _box(b"trak", tkhd))
    ftyp = _box(b"ftyp", b"isom" + struct.pack(">I", 512) + b"isomiso2")
    mdat = _box(b"mdat", payload)
    return ftyp + moov + mdat


_IDENTITY_MATRIX = struct.pack(">9I", 0x00010000, 0, 0, 0, 0x00010000, 0, 0, 0, 0x40000000)


# ---------------------------------------------------------------------------
# Deterministic placeholder synthesis (used by the mock provider and fixtures)


def make_placeholder_png(digest: str, width: int = 512, height: int = 288) -> bytes:
    """Render a deterministic color-grid PNG; the digest is embedded as a
    tEXt chunk so tests can assert which request produced the image."""
    raw = bytes.fromhex(digest[:48].ljust(48, "0"))
    img = Image.new("RGB", (width, height))
    cell_w = max(1, width // 4)
    cell_h = max(1, height // 4)
    for idx in range(16):
        r, g, b = raw[idx % len(raw)], raw[(idx * 3 + 1) % len(raw)], raw[(idx * 7 + 2) % len(raw)]
        x0 = (idx % 4) * cell_w
        y0 = (idx // 4) * cell_h
        img.paste((r, g, b), (x0, y0, min(width, x0 + cell_w), min(height, y0 + cell_h)))
    meta = PngImagePlugin.PngInfo()
    meta.add_text("storyweave-digest", digest)
    buf = io.BytesIO()
    img.save(buf, format="PNG", pnginfo=meta)
    return buf.getvalue()


def make_silence_wav(duration_s: float, rate: int = 8000) -> bytes:
    frames = max(0, round(duration_s * rate))
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(rate)
        wav.writeframes(b"\x00\x00" * frames)
    return buf.getvalue()


def make_digest_wav(duration_s: float, digest: str, rate: int = 8000) -> bytes:
    """Quiet deterministic noise derived from a digest, so two clips of the
    same length from different requests never collide by checksum."""
    frames = max(1, round(duration_s * rate))
    seedbytes = bytes.fromhex(digest)
    payload = (seedbytes * (frames * 2 // len(seedbytes) + 1))[: frames * 2]
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(rate)
        wav.writeframes(payload)
    return buf.getvalue()


def downscale_image(data: bytes, max_edge: int = 512) -> bytes:
    """Downscale an encoded image to at most max_edge on the long side."""
    with Image.open(io.BytesIO(data)) as img:
        w, h = img.size
        if max(w, h) <= max_edge:
            return data
        scale = max_edge / max(w, h)
        resized = img.resize((max(1, round(w * scale)), max(1, round(h * scale))))
        buf = io.BytesIO()
        resized.save(buf, format="PNG")
        return buf.getvalue()
