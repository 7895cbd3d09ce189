"""Truncated Taylor ("jet") arithmetic over the complex numbers.

A :class:`JetScalar` of order ``k`` carries a value together with its first
``k`` derivatives along one curve parameter: an element of the quotient ring
C[eps] / (eps^(k+1)).  Coefficients may themselves be jets, which models
several independent nilpotent parameters at once and yields mixed partial
derivatives; iterated second-order operators are computed by nesting one
level per iteration.

Plain ``complex`` is the base scalar.  Values are immutable after
construction and every operation is pure, so jets can be shared freely
between concurrent workers.

Analytic functions (:func:`jlog`, :func:`jexp`, :func:`jsqrt`, :func:`jpow`)
use principal branches throughout.  They raise :class:`BranchCutError` when
the base value of the argument is within ``BRANCH_FLOOR`` of the origin or
within ``BRANCH_ANGLE`` radians of the cut along the negative real axis, so
callers can reject the sample point and draw another instead of committing
an ill-conditioned result.
"""

from __future__ import annotations

import cmath
import math
from numbers import Number
from typing import Union

Scalar = Union[complex, "JetScalar"]

# Arguments closer than this to the branch cut of log/pow are refused.
BRANCH_FLOOR = 1e-6
BRANCH_ANGLE = 1e-6

# exp overflows double precision near Re(z) = 709.
_EXP_OVERFLOW = 700.0


class JetError(ArithmeticError):
    """Base class for jet arithmetic failures."""


class ShapeMismatch(JetError):
    """Two jets of incompatible truncation shapes met in one operation."""


class BranchCutError(JetError):
    """An analytic function was evaluated on or too near its branch cut."""


class NonFiniteError(JetError):
    """An operation would have committed a NaN or infinity."""


def shape_of(value) -> tuple:
    """Truncation shape: () for a plain number, (order, *inner) for a jet."""
    return value.shape if isinstance(value, JetScalar) else ()


def _require_finite(z: complex) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise NonFiniteError(f"non-finite scalar {z!r}")
    return z


class JetScalar:
    """Polynomial in one nilpotent variable, truncated at ``order``.

    ``coeffs`` has length ``order + 1``; entries are either ``complex`` or
    jets of one common inner shape.  Multiplication is the Cauchy product
    truncated at ``order``, so ``variable(0, k) ** (k + 1)`` is exactly zero.
    """

    __slots__ = ("order", "coeffs", "shape")

    def __init__(self, order: int, coeffs):
        coeffs = tuple(coeffs)
        if order < 1:
            raise JetError(f"jet order must be >= 1, got {order}")
        if len(coeffs) != order + 1:
            raise JetError(f"expected {order + 1} coefficients, got {len(coeffs)}")
        inner = shape_of(coeffs[0])
        for c in coeffs[1:]:
            if shape_of(c) != inner:
                raise ShapeMismatch("jet coefficients have inconsistent shapes")
        self.order = order
        self.coeffs = coeffs
        self.shape = (order,) + inner

    # -- access ------------------------------------------------------------

    def coefficient(self, i: int):
        """Coefficient of eps^i (a scalar of the inner shape)."""
        return self.coeffs[i]

    def constant_value(self) -> complex:
        """The underlying point value: coefficient 0 through every level."""
        v = self
        while isinstance(v, JetScalar):
            v = v.coeffs[0]
        return complex(v)

    # -- ring operations -----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, JetScalar):
            if other.shape == self.shape:
                return JetScalar(
                    self.order,
                    tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
                )
            if other.shape == self.shape[1:]:
                return JetScalar(
                    self.order, (self.coeffs[0] + other,) + self.coeffs[1:]
                )
            if self.shape == other.shape[1:]:
                return other + self
            raise ShapeMismatch(f"cannot add shapes {self.shape} and {other.shape}")
        if isinstance(other, Number):
            return JetScalar(
                self.order, (self.coeffs[0] + complex(other),) + self.coeffs[1:]
            )
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return JetScalar(self.order, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-other if isinstance(other, JetScalar) else -complex(other))

    def __rsub__(self, other):
        return (-self) + complex(other)

    def __mul__(self, other):
        if isinstance(other, JetScalar):
            if other.shape == self.shape:
                a, b = self.coeffs, other.coeffs
                out = []
                for k in range(self.order + 1):
                    acc = a[0] * b[k]
                    for i in range(1, k + 1):
                        acc = acc + a[i] * b[k - i]
                    out.append(acc)
                return JetScalar(self.order, out)
            if other.shape == self.shape[1:]:
                return JetScalar(self.order, tuple(c * other for c in self.coeffs))
            if self.shape == other.shape[1:]:
                return JetScalar(other.order, tuple(self * c for c in other.coeffs))
            raise ShapeMismatch(
                f"cannot multiply shapes {self.shape} and {other.shape}"
            )
        if isinstance(other, Number):
            z = complex(other)
            return JetScalar(self.order, tuple(c * z for c in self.coeffs))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, JetScalar):
            return self * reciprocal(other)
        if isinstance(other, Number):
            return self * reciprocal(complex(other))
        return NotImplemented

    def __rtruediv__(self, other):
        return reciprocal(self) * complex(other)

    def __pow__(self, exponent):
        if isinstance(exponent, Number):
            e = complex(exponent)
            if e.imag == 0.0 and e.real == int(e.real):
                return ipow(self, int(e.real))
            return jpow(self, e)
        return NotImplemented

    # -- comparison / display --------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, JetScalar):
            return self.shape == other.shape and self.coeffs == other.coeffs
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"Jet{self.coeffs!r}"


# -- constructors ---------------------------------------------------------


def zero(shape: tuple):
    """The zero scalar of the given truncation shape."""
    if shape == ():
        return 0j
    inner = shape[1:]
    return JetScalar(shape[0], tuple(zero(inner) for _ in range(shape[0] + 1)))


def constant(c, shape: tuple):
    """Lift a plain number into the given truncation shape."""
    if shape == ():
        return _require_finite(c)
    inner = shape[1:]
    return JetScalar(
        shape[0],
        (constant(c, inner),) + tuple(zero(inner) for _ in range(shape[0])),
    )


def lift(c, order: int) -> JetScalar:
    """Constant jet: coefficients (c, 0, ..., 0)."""
    if order < 1:
        raise JetError(f"jet order must be >= 1, got {order}")
    return JetScalar(order, (_require_finite(c),) + (0j,) * order)


def variable(c, order: int) -> JetScalar:
    """Curve-parameter jet: coefficients (c, 1, 0, ..., 0)."""
    if order < 1:
        raise JetError(f"jet order must be >= 1, got {order}")
    return JetScalar(order, (_require_finite(c), 1 + 0j) + (0j,) * (order - 1))


def zero_like(value):
    return zero(shape_of(value))


def one_like(value):
    return constant(1.0, shape_of(value))


def nilpotent_part(a: JetScalar) -> JetScalar:
    """Copy of ``a`` with its constant coefficient replaced by zero."""
    return JetScalar(a.order, (zero(a.shape[1:]),) + a.coeffs[1:])


def is_zero(value) -> bool:
    """Exact (coefficient-wise) zero test."""
    if isinstance(value, JetScalar):
        return all(is_zero(c) for c in value.coeffs)
    return complex(value) == 0j


def scalar_value(value) -> complex:
    """Point value of a plain number or a jet of any nesting depth."""
    if isinstance(value, JetScalar):
        return value.constant_value()
    return complex(value)


def assert_finite(value):
    """Raise :class:`NonFiniteError` if any coefficient is NaN or infinite."""
    if isinstance(value, JetScalar):
        for c in value.coeffs:
            assert_finite(c)
        return value
    return _require_finite(value)


# -- division and analytic functions ------------------------------------------


def reciprocal(value: Scalar) -> Scalar:
    """Multiplicative inverse; the constant term must be nonzero."""
    if isinstance(value, Number):
        z = complex(value)
        if z == 0j:
            raise JetError("division by a scalar with zero constant term")
        return 1.0 / z
    inv0 = reciprocal(value.coeffs[0])
    out = [inv0]
    a = value.coeffs
    for k in range(1, value.order + 1):
        acc = a[1] * out[k - 1]
        for i in range(2, k + 1):
            acc = acc + a[i] * out[k - i]
        out.append(-(inv0 * acc))
    return JetScalar(value.order, out)


def ipow(value: Scalar, exponent: int) -> Scalar:
    """Integer power by repeated squaring; works for numbers and jets alike.

    Negative exponents invert first, so only the constant term has to be
    nonzero; no branch cut is involved.
    """
    if exponent < 0:
        return ipow(reciprocal(value), -exponent)
    if exponent == 0:
        return one_like(value)
    result = None
    base = value
    e = exponent
    while e:
        if e & 1:
            result = base if result is None else result * base
        e >>= 1
        if e:
            base = base * base
    return result


def _check_branch(z: complex, floor: float, angle: float) -> complex:
    z = _require_finite(z)
    if abs(z) < floor:
        raise BranchCutError(f"magnitude {abs(z):.3e} below branch floor {floor:.1e}")
    if math.pi - abs(cmath.phase(z)) < angle:
        raise BranchCutError(f"argument of {z!r} within {angle:.1e} of the cut")
    return z


def _compose(a: JetScalar, taylor):
    """Evaluate sum taylor[i] * h^i by Horner, h the nilpotent part of a."""
    h = nilpotent_part(a)
    acc = taylor[-1]
    for t in reversed(taylor[:-1]):
        acc = acc * h + t
    return acc


def jlog(value: Scalar, floor: float = BRANCH_FLOOR, angle: float = BRANCH_ANGLE) -> Scalar:
    """Principal logarithm of a number or jet."""
    if isinstance(value, Number):
        return cmath.log(_check_branch(complex(value), floor, angle))
    base = jlog(value.coeffs[0], floor, angle)
    inv = reciprocal(value.coeffs[0])
    taylor = [base]
    power = inv
    sign = 1.0
    for i in range(1, value.order + 1):
        taylor.append(power * (sign / i))
        if i < value.order:
            power = power * inv
        sign = -sign
    return _compose(value, taylor)


def jexp(value: Scalar) -> Scalar:
    """Exponential of a number or jet."""
    if isinstance(value, Number):
        z = _require_finite(complex(value))
        if z.real > _EXP_OVERFLOW:
            raise NonFiniteError(f"exp overflow at Re(z) = {z.real:.3g}")
        return cmath.exp(z)
    e0 = jexp(value.coeffs[0])
    taylor = [e0]
    fact = 1.0
    for i in range(1, value.order + 1):
        fact /= i
        taylor.append(e0 * fact)
    return _compose(value, taylor)


def jpow(value: Scalar, exponent, floor: float = BRANCH_FLOOR, angle: float = BRANCH_ANGLE) -> Scalar:
    """Principal power value**exponent, computed as exp(exponent * log(value))."""
    return jexp(jlog(value, floor, angle) * complex(exponent))


def jsqrt(value: Scalar, floor: float = BRANCH_FLOOR, angle: float = BRANCH_ANGLE) -> Scalar:
    """Principal square root."""
    return jpow(value, 0.5, floor, angle)
