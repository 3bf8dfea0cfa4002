"""ECVRF-EDWARDS25519-SHA512-TAI (RFC 9381) in pure Python.

Slow (a few milliseconds per scalar multiplication) but dependency free.
Secret and public keys use the Ed25519 encodings of RFC 8032, so a key pair
generated for Ed25519 signatures works unchanged here.
"""

from __future__ import annotations

import hashlib

SUITE = b"\x03"
P = 2**255 - 19
Q = 2**252 + 27742317777372353535851937790883648493  # group order
D = (-121665 * pow(121666, P - 2, P)) % P
SQRT_M1 = pow(2, (P - 1) // 4, P)
C_LEN = 16
PT_LEN = 32

# Extended homogeneous coordinates (X, Y, Z, T) with x = X/Z, y = Y/Z, xy = T/Z.
Point = tuple[int, int, int, int]

IDENTITY: Point = (0, 1, 1, 0)


def _sha512(data: bytes) -> bytes:
    return hashlib.sha512(data).digest()


def _add(p1: Point, p2: Point) -> Point:
    x1, y1, z1, t1 = p1
    x2, y2, z2, t2 = p2
    a = (y1 - x1) * (y2 - x2) % P
    b = (y1 + x1) * (y2 + x2) % P
    c = 2 * t1 * t2 * D % P
    d = 2 * z1 * z2 % P
    e, f, g, h = b - a, d - c, d + c, b + a
    return (e * f % P, g * h % P, f * g % P, e * h % P)


def _double(p1: Point) -> Point:
    x1, y1, z1, _ = p1
    a = x1 * x1 % P
    b = y1 * y1 % P
    c = 2 * z1 * z1 % P
    h = a + b
    e = h - (x1 + y1) * (x1 + y1) % P
    g = a - b
    f = c + g
    return (e * f % P, g * h % P, f * g % P, e * h % P)


def _neg(p1: Point) -> Point:
    x1, y1, z1, t1 = p1
    return ((-x1) % P, y1, z1, (-t1) % P)


def scalar_mult(k: int, p1: Point) -> Point:
    result = IDENTITY
    addend = p1
    while k > 0:
        if k & 1:
            result = _add(result, addend)
        addend = _double(addend)
        k >>= 1
    return result


def points_equal(p1: Point, p2: Point) -> bool:
    x1, y1, z1, _ = p1
    x2, y2, z2, _ = p2
    return (x1 * z2 - x2 * z1) % P == 0 and (y1 * z2 - y2 * z1) % P == 0


def _recover_x(y: int, sign: int) -> int | None:
    if y >= P:
        return None
    x2 = (y * y - 1) * pow(D * y * y + 1, P - 2, P) % P
    if x2 == 0:
        return None if sign else 0
    x = pow(x2, (P + 3) // 8, P)
    if (x * x - x2) % P != 0:
        x = x * SQRT_M1 % P
    if (x * x - x2) % P != 0:
        return None
    if (x & 1) != sign:
        x = P - x
    return x


_GY = 4 * pow(5, P - 2, P) % P
_GX = _recover_x(_GY, 0)
BASE: Point = (_GX, _GY, 1, _GX * _GY % P)


def point_to_string(p1: Point) -> bytes:
    x1, y1, z1, _ = p1
    zinv = pow(z1, P - 2, P)
    x = x1 * zinv % P
    y = y1 * zinv % P
    return int.to_bytes(y | ((x & 1) << 255), 32, "little")


def string_to_point(s: bytes) -> Point | None:
    """Decode a 32-byte point; ``None`` on any decoding failure."""
    if len(s) != 32:
        return None
    y = int.from_bytes(s, "little")
    sign = y >> 255
    y &= (1 << 255) - 1
    x = _recover_x(y, sign)
    if x is None:
        return None
    return (x, y, 1, x * y % P)


def _secret_expand(sk: bytes) -> tuple[int, bytes]:
    if len(sk) != 32:
        raise ValueError("secret key must be 32 bytes")
    h = _sha512(sk)
    a = int.from_bytes(h[:32], "little")
    a &= (1 << 254) - 8
    a |= 1 << 254
    return a, h[32:]


def public_key(sk: bytes) -> bytes:
    a, _ = _secret_expand(sk)
    return point_to_string(scalar_mult(a, BASE))


def _encode_to_curve(salt: bytes, alpha: bytes) -> Point:
    for ctr in range(256):
        h = _sha512(SUITE + b"\x01" + salt + alpha + bytes([ctr]) + b"\x00")
        pt = string_to_point(h[:32])
        if pt is not None:
            return scalar_mult(8, pt)
    raise RuntimeError("encode_to_curve exhausted its counter")  # probability ~2^-256


def _challenge(*points: Point) -> int:
    data = SUITE + b"\x02" + b"".join(point_to_string(p) for p in points) + b"\x00"
    return int.from_bytes(_sha512(data)[:C_LEN], "little")


def prove(sk: bytes, alpha: bytes) -> bytes:
    """Return the 80-byte proof ``pi`` for message ``alpha``."""
    x, prefix = _secret_expand(sk)
    y = scalar_mult(x, BASE)
    pk = point_to_string(y)
    h = _encode_to_curve(pk, alpha)
    h_string = point_to_string(h)
    gamma = scalar_mult(x, h)
    k = int.from_bytes(_sha512(prefix + h_string), "little") % Q
    c = _challenge(y, h, gamma, scalar_mult(k, BASE), scalar_mult(k, h))
    s = (k + c * x) % Q
    return point_to_string(gamma) + c.to_bytes(C_LEN, "little") + s.to_bytes(32, "little")


def proof_to_hash(pi: bytes) -> bytes | None:
    decoded = _decode_proof(pi)
    if decoded is None:
        return None
    gamma = decoded[0]
    return _sha512(SUITE + b"\x03" + point_to_string(scalar_mult(8, gamma)) + b"\x00")


def _decode_proof(pi: bytes) -> tuple[Point, int, int] | None:
    if len(pi) != PT_LEN + C_LEN + 32:
        return None
    gamma = string_to_point(pi[:PT_LEN])
    if gamma is None:
        return None
    c = int.from_bytes(pi[PT_LEN : PT_LEN + C_LEN], "little")
    s = int.from_bytes(pi[PT_LEN + C_LEN :], "little")
    if s >= Q:
        return None
    return gamma, c, s


def verify(pk: bytes, pi: bytes, alpha: bytes) -> bytes | None:
    """Return the 64-byte output ``beta`` if ``pi`` is valid, else ``None``."""
    y = string_to_point(pk)
    if y is None or points_equal(scalar_mult(8, y), IDENTITY):
        return None
    decoded = _decode_proof(pi)
    if decoded is None:
        return None
    gamma, c, s = decoded
    h = _encode_to_curve(pk, alpha)
    u = _add(scalar_mult(s, BASE), _neg(scalar_mult(c, y)))
    v = _add(scalar_mult(s, h), _neg(scalar_mult(c, gamma)))
    if _challenge(y, h, gamma, u, v) != c:
        return None
    return proof_to_hash(pi)
