"""Platform-independent cos, arccos and arctan in binary64.

Key streams are derived as ``floor(x * 1e14) mod m``, which turns a one-ulp
difference in a libm result into a different key.  These routines follow the
fdlibm algorithms with their published minimax coefficients and a fixed
evaluation order, so every platform with IEEE-754 doubles (and a correctly
rounded ``sqrt``) produces identical bits.
"""

import math
import struct

_PIO2_HI = 1.57079632679489655800e00
_PIO2_LO = 6.12323399573676603587e-17
_PI = 3.14159265358979311600e00

# Cody-Waite split of pi/2, good for |x| up to a few thousand radians.
_INVPIO2 = 6.36619772367581382433e-01
_PIO2_1 = 1.57079632673412561417e00
_PIO2_1T = 6.07710050650619224932e-11

_S1 = -1.66666666666666324348e-01
_S2 = 8.33333333332248946124e-03
_S3 = -1.98412698298579493134e-04
_S4 = 2.75573137070700676789e-06
_S5 = -2.50507602534068634195e-08
_S6 = 1.58969099521155010221e-10

_C1 = 4.16666666666666019037e-02
_C2 = -1.38888888888741095749e-03
_C3 = 2.48015872894767294178e-05
_C4 = -2.75573143513906633035e-07
_C5 = 2.08757232129817482790e-09
_C6 = -1.13596475577881948265e-11

_PS0 = 1.66666666666666657415e-01
_PS1 = -3.25565818622400915405e-01
_PS2 = 2.01212532134862925881e-01
_PS3 = -4.00555345006794114027e-02
_PS4 = 7.91534994289814532176e-04
_PS5 = 3.47933107596021167570e-05
_QS1 = -2.40339491173441421878e00
_QS2 = 2.02094576023350569471e00
_QS3 = -6.88283971605453293030e-01
_QS4 = 7.70381505559019352791e-02

_ATANHI = (
    4.63647609000806093515e-01,
    7.85398163397448278999e-01,
    9.82793723247329054082e-01,
    1.57079632679489655800e00,
)
_ATANLO = (
    2.26987774529616870924e-17,
    3.06161699786838301793e-17,
    1.39033110312309984516e-17,
    6.12323399573676603587e-17,
)
_AT = (
    3.33333333333329318027e-01,
    -1.99999999998764832476e-01,
    1.42857142725034663711e-01,
    -1.11111104054623557880e-01,
    9.09088713343650656196e-02,
    -7.69187620504482999495e-02,
    6.66107313738753120669e-02,
    -5.83357013379057348645e-02,
    4.97687799461593236017e-02,
    -3.65315727442169155270e-02,
    1.62858201153657823623e-02,
)


def _kernel_cos(x, y):
    z = x * x
    w = z * z
    r = z * (_C1 + z * (_C2 + z * _C3)) + w * w * (_C4 + z * (_C5 + z * _C6))
    hz = 0.5 * z
    w = 1.0 - hz
    return w + (((1.0 - w) - hz) + (z * r - x * y))


def _kernel_sin(x, y):
    z = x * x
    w = z * z
    r = _S2 + z * (_S3 + z * _S4) + z * w * (_S5 + z * _S6)
    v = z * x
    return x - ((z * (0.5 * y - v * r) - y) - v * _S1)


def _reduce(x):
    n = math.floor(x * _INVPIO2 + 0.5)
    fn = float(n)
    r = x - fn * _PIO2_1
    w = fn * _PIO2_1T
    y0 = r - w
    y1 = (r - y0) - w
    return n & 3, y0, y1


def cos(x: float) -> float:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return math.nan
    if abs(x) <= 0.7853981633974483:
        return _kernel_cos(x, 0.0)
    n, y0, y1 = _reduce(x)
    if n == 0:
        return _kernel_cos(y0, y1)
    if n == 1:
        return -_kernel_sin(y0, y1)
    if n == 2:
        return -_kernel_cos(y0, y1)
    return _kernel_sin(y0, y1)


def _clear_low_word(x):
    bits = struct.unpack("<Q", struct.pack("<d", x))[0]
    return struct.unpack("<d", struct.pack("<Q", bits & 0xFFFFFFFF00000000))[0]


def _acos_rational(z):
    p = z * (_PS0 + z * (_PS1 + z * (_PS2 + z * (_PS3 + z * (_PS4 + z * _PS5)))))
    q = 1.0 + z * (_QS1 + z * (_QS2 + z * (_QS3 + z * _QS4)))
    return p / q


def acos(x: float) -> float:
    x = float(x)
    ax = abs(x)
    if ax >= 1.0:
        if x == 1.0:
            return 0.0
        if x == -1.0:
            return _PI + 2.0 * _PIO2_LO
        return math.nan
    if ax < 0.5:
        if ax <= 2.0**-57:
            return _PIO2_HI + _PIO2_LO
        r = _acos_rational(x * x)
        return _PIO2_HI - (x - (_PIO2_LO - x * r))
    if x < 0.0:
        z = (1.0 + x) * 0.5
        s = math.sqrt(z)
        r = _acos_rational(z)
        w = r * s - _PIO2_LO
        return _PI - 2.0 * (s + w)
    z = (1.0 - x) * 0.5
    s = math.sqrt(z)
    df = _clear_low_word(s)
    c = (z - df * df) / (s + df)
    r = _acos_rational(z)
    w = r * s + c
    return 2.0 * (df + w)


def atan(x: float) -> float:
    """Arc tangent; ``atan(+-inf)`` is ``+-pi/2``."""
    x = float(x)
    if math.isnan(x):
        return math.nan
    negative = x < 0.0 or (x == 0.0 and math.copysign(1.0, x) < 0.0)
    ax = abs(x)
    if ax >= 2.0**66:
        z = _ATANHI[3] + _ATANLO[3]
        return -z if negative else z
    if ax < 0.4375:
        if ax < 2.0**-27:
            return x
        idx = -1
        t = ax
    elif ax < 1.1875:
        if ax < 0.6875:
            idx = 0
            t = (2.0 * ax - 1.0) / (2.0 + ax)
        else:
            idx = 1
            t = (ax - 1.0) / (ax + 1.0)
    elif ax < 2.4375:
        idx = 2
        t = (ax - 1.5) / (1.0 + 1.5 * ax)
    else:
        idx = 3
        t = -1.0 / ax
    z = t * t
    w = z * z
    s1 = z * (_AT[0] + w * (_AT[2] + w * (_AT[4] + w * (_AT[6] + w * (_AT[8] + w * _AT[10])))))
    s2 = w * (_AT[1] + w * (_AT[3] + w * (_AT[5] + w * (_AT[7] + w * _AT[9]))))
    if idx < 0:
        z = t - t * (s1 + s2)
    else:
        z = _ATANHI[idx] - ((t * (s1 + s2) - _ATANLO[idx]) - t)
    return -z if negative else z
