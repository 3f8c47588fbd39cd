"""Prime-field arithmetic helpers shared by both key-exchange schemes.

Polynomials are coefficient lists in ascending order: ``[a0, a1, ...]``.
"""

from __future__ import annotations

# 2^61 - 1, a Mersenne prime; default field modulus for key splitting.
DEFAULT_PRIME = 2305843009213693951

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def poly_eval(coeffs: list[int], x: int, p: int) -> int:
    """Horner evaluation of the polynomial at x, mod p."""
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def poly_from_roots(roots: list[int], p: int) -> list[int]:
    """Monic polynomial with the given roots, mod p."""
    coeffs = [1]
    for r in roots:
        coeffs = [0] + coeffs
        for i in range(len(coeffs) - 1):
            coeffs[i] = (coeffs[i] - r * coeffs[i + 1]) % p
    return coeffs


def lagrange_at_zero(points: list[tuple[int, int]], p: int) -> int:
    """Value at x=0 of the unique interpolating polynomial through the points."""
    xs = [x for x, _ in points]
    if len(set(x % p for x in xs)) != len(xs):
        raise ValueError("duplicate x values")
    acc = 0
    for i, (xi, yi) in enumerate(points):
        num = 1
        den = 1
        for j, (xj, _) in enumerate(points):
            if j != i:
                num = num * (-xj) % p
                den = den * (xi - xj) % p
        acc = (acc + yi * num * pow(den, -1, p)) % p
    return acc


def lagrange_coefficients(points: list[tuple[int, int]], p: int) -> list[int]:
    """Full coefficient vector of the interpolating polynomial (degree < len(points))."""
    xs = [x for x, _ in points]
    if len(set(x % p for x in xs)) != len(xs):
        raise ValueError("duplicate x values")
    n = len(points)
    # Master polynomial prod (x - xj), then divide back out per point.
    master = poly_from_roots(xs, p)
    coeffs = [0] * n
    for xi, yi in points:
        # Synthetic division of master by (x - xi).
        quotient = [0] * n
        rem = master[n]
        for k in range(n - 1, -1, -1):
            quotient[k] = rem
            rem = (master[k] + rem * xi) % p
        denom = poly_eval(quotient, xi, p)
        scale = yi * pow(denom, -1, p) % p
        for k in range(n):
            coeffs[k] = (coeffs[k] + scale * quotient[k]) % p
    return coeffs
