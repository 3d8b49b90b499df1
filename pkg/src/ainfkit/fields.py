"""Exact scalar arithmetic: the rationals and prime fields.

Every computation in this package is an exact identity check, so scalars are
either `fractions.Fraction` (kept in lowest terms with positive denominator by
the stdlib) or integers reduced into [0, p).  A `Field` object carries the
operations; matrices and maps store raw scalar values and dispatch through it.
"""

from fractions import Fraction


class Field:
    """Common interface for QQ and GF(p)."""

    def __call__(self, x):
        return self.of(x)


class Rationals(Field):
    name = "Q"

    zero = Fraction(0)
    one = Fraction(1)

    def of(self, x):
        return Fraction(x)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return 1 / Fraction(a)

    def is_zero(self, a):
        return a == 0

    def parse(self, s):
        return Fraction(s)

    def show(self, a):
        a = Fraction(a)
        return str(a.numerator) if a.denominator == 1 else "%d/%d" % (a.numerator, a.denominator)

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("Q")

    def __repr__(self):
        return "QQ"


class PrimeField(Field):
    def __init__(self, p):
        assert p >= 2
        for d in range(2, int(p ** 0.5) + 1):
            assert p % d != 0, "modulus must be prime"
        self.p = p
        self.name = "F%d" % p
        self.zero = 0
        self.one = 1 % p

    def of(self, x):
        return int(x) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return pow(a, self.p - 2, self.p)

    def is_zero(self, a):
        return a % self.p == 0

    def parse(self, s):
        return int(s) % self.p

    def show(self, a):
        return str(a % self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))

    def __repr__(self):
        return "GF(%d)" % self.p


QQ = Rationals()


def GF(p):
    return PrimeField(p)


def field_from_spec(spec):
    """Parse a field declaration: "Q" or "Fp <prime>"."""
    parts = spec.split()
    if parts == ["Q"]:
        return QQ
    if len(parts) == 2 and parts[0] == "Fp":
        return GF(int(parts[1]))
    raise ValueError("unknown field spec %r" % spec)


def field_spec(field):
    return "Q" if field == QQ else "Fp %d" % field.p
