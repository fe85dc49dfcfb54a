"""Minimal 8-bit PNG / PPM / PGM codec built on zlib.

Reads non-interlaced 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette) and
binary PNM (P5, P6, maxval 255). Writes unfiltered PNG and binary PNM.
Alpha channels are dropped on read.
"""
import struct
import zlib

import numpy as np

from .errors import IngestionError

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_CHANNELS = {0: 1, 2: 3, 3: 1, 4: 2, 6: 4}


def _chunks(data):
    pos = len(PNG_SIGNATURE)
    while pos + 8 <= len(data):
        length, ctype = struct.unpack(">I4s", data[pos:pos + 8])
        body = data[pos + 8:pos + 8 + length]
        crc_bytes = data[pos + 8 + length:pos + 12 + length]
        if len(body) != length or len(crc_bytes) != 4:
            raise IngestionError("PNG: truncated chunk")
        crc = struct.unpack(">I", crc_bytes)[0]
        if zlib.crc32(ctype + body) != crc:
            raise IngestionError(f"PNG: CRC mismatch in {ctype.decode('latin-1')} chunk")
        yield ctype, body
        pos += 12 + length


def _paeth(a, b, c):
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    return b if pb <= pc else c


def _unfilter(raw, height, stride, bpp):
    out = np.zeros((height, stride), dtype=np.uint8)
    prev = bytearray(stride)
    pos = 0
    for y in range(height):
        ftype = raw[pos]
        line = bytearray(raw[pos + 1:pos + 1 + stride])
        pos += 1 + stride
        if ftype == 1:
            for i in range(bpp, stride):
                line[i] = (line[i] + line[i - bpp]) & 0xFF
        elif ftype == 2:
            for i in range(stride):
                line[i] = (line[i] + prev[i]) & 0xFF
        elif ftype == 3:
            for i in range(stride):
                left = line[i - bpp] if i >= bpp else 0
                line[i] = (line[i] + ((left + prev[i]) >> 1)) & 0xFF
        elif ftype == 4:
            for i in range(stride):
                left = line[i - bpp] if i >= bpp else 0
                upleft = prev[i - bpp] if i >= bpp else 0
                line[i] = (line[i] + _paeth(left, prev[i], upleft)) & 0xFF
        elif ftype != 0:
            raise IngestionError(f"PNG: unknown filter type {ftype}")
        out[y] = np.frombuffer(bytes(line), dtype=np.uint8)
        prev = line
    return out


def decode_png(data):
    if not data.startswith(PNG_SIGNATURE):
        raise IngestionError("not a PNG file")
    header = None
    palette = None
    idat = []
    for ctype, body in _chunks(data):
        if ctype == b"IHDR":
            header = struct.unpack(">IIBBBBB", body)
        elif ctype == b"PLTE":
            palette = np.frombuffer(body, dtype=np.uint8).reshape(-1, 3)
        elif ctype == b"IDAT":
            idat.append(body)
        elif ctype == b"IEND":
            break
    if header is None:
        raise IngestionError("PNG: missing IHDR chunk")
    width, height, depth, ctype, _, _, interlace = header
    if depth != 8:
        raise IngestionError(f"PNG: unsupported bit depth {depth} (only 8-bit images are supported)")
    if ctype not in _CHANNELS:
        raise IngestionError(f"PNG: unsupported color type {ctype}")
    if interlace:
        raise IngestionError("PNG: interlaced images are not supported")
    ch = _CHANNELS[ctype]
    try:
        raw = zlib.decompress(b"".join(idat))
    except zlib.error as exc:
        raise IngestionError(f"PNG: corrupt image data ({exc})") from None
    if len(raw) != height * (1 + width * ch):
        raise IngestionError("PNG: image data has the wrong length")
    pix = _unfilter(raw, height, width * ch, ch).reshape(height, width, ch)
    if ctype == 3:
        if palette is None:
            raise IngestionError("PNG: palette image without PLTE chunk")
        pix = palette[pix[..., 0]]
    elif ctype in (4, 6):
        pix = pix[..., :-1]
    return np.ascontiguousarray(pix)


def encode_png(pixels):
    pix = np.asarray(pixels, dtype=np.uint8)
    if pix.ndim == 2:
        pix = pix[..., None]
    h, w, c = pix.shape
    ctype = {1: 0, 3: 2}.get(c)
    if ctype is None:
        raise ValueError(f"PNG export supports 1 or 3 channels, got {c}")
    rows = np.concatenate([np.zeros((h, 1), dtype=np.uint8), pix.reshape(h, w * c)], axis=1)

    def chunk(tag, body):
        return struct.pack(">I", len(body)) + tag + body + struct.pack(">I", zlib.crc32(tag + body))

    ihdr = struct.pack(">IIBBBBB", w, h, 8, ctype, 0, 0, 0)
    return (PNG_SIGNATURE + chunk(b"IHDR", ihdr) + chunk(b"IDAT", zlib.compress(rows.tobytes(), 9))
            + chunk(b"IEND", b""))


def _pnm_tokens(data, count):
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise IngestionError("PNM: truncated header")
        tokens.append(data[start:pos])
    return tokens, pos + 1


def decode_pnm(data):
    (magic, w, h, maxval), pos = _pnm_tokens(data, 4)
    if magic not in (b"P5", b"P6"):
        raise IngestionError(f"unsupported PNM variant {magic.decode('latin-1')!r} (expected binary P5/P6)")
    w, h, maxval = int(w), int(h), int(maxval)
    if maxval != 255:
        raise IngestionError(f"PNM: unsupported maxval {maxval} (only 8-bit images are supported)")
    ch = 3 if magic == b"P6" else 1
    body = data[pos:pos + w * h * ch]
    if len(body) != w * h * ch:
        raise IngestionError("PNM: truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, ch).copy()


def encode_pnm(pixels):
    pix = np.asarray(pixels, dtype=np.uint8)
    if pix.ndim == 2:
        pix = pix[..., None]
    h, w, c = pix.shape
    if c not in (1, 3):
        raise ValueError(f"PNM export supports 1 or 3 channels, got {c}")
    magic = "P6" if c == 3 else "P5"
    return f"{magic}\n{w} {h}\n255\n".encode("ascii") + pix.tobytes()


def read_image(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data.startswith(PNG_SIGNATURE):
        return decode_png(data)
    if data[:2] in (b"P5", b"P6"):
        return decode_pnm(data)
    if data[:1] == b"P" and data[1:2].isdigit():
        raise IngestionError(f"unsupported PNM variant {data[:2].decode('latin-1')!r} (expected binary P5/P6)")
    raise IngestionError(f"{path}: unrecognised image format (expected PNG, PPM or PGM)")


def write_image(path, pixels):
    path = str(path)
    data = encode_png(pixels) if path.lower().endswith(".png") else encode_pnm(pixels)
    with open(path, "wb") as fh:
        fh.write(data)
