"""Sampled weighted norms for the realization report.

||P||_{delta,nu,0} = sup_{|x|<delta} |P(x)| * |x|^(-nu), with |P| the largest
component, sampled on a fixed grid of rational points: radii delta/4,
delta/2, 3*delta/4 along every positive and negative coordinate axis and
along both main diagonals. The weight uses the sup norm |x|_inf so every
sample stays rational. These numbers are diagnostics only.
"""

from sympy.polys.domains import QQ

from services.jetcalc import evaluate, to_rational

DEFAULT_SAMPLE_RADIUS = QQ(1, 2)
RADIUS_FRACTIONS = (QQ(1, 4), QQ(1, 2), QQ(3, 4))


def sample_points(dim, radius=DEFAULT_SAMPLE_RADIUS):
    """[(point, |point|_inf)] in a deterministic order."""
    radius = to_rational(radius)
    points = []
    for fraction in RADIUS_FRACTIONS:
        r = radius * fraction
        for axis in range(dim):
            for sign in (1, -1):
                point = [QQ.zero] * dim
                point[axis] = r * sign
                points.append((tuple(point), r))
        points.append(((r,) * dim, r))
        points.append(((-r,) * dim, r))
    return points


def field_jets(field):
    """Flatten a tensor-of-jets (anything with .entries, a dict or a list)."""
    if hasattr(field, "entries"):
        return list(field.entries.values())
    if isinstance(field, dict):
        return list(field.values())
    return list(field)


def weighted_norm_sample(field, nu, radius=DEFAULT_SAMPLE_RADIUS):
    """max over the sample grid of max_component |P(x)| / |x|^nu."""
    jets = [jet for jet in field_jets(field) if jet]
    if not jets:
        return QQ.zero
    dim = jets[0].dim
    best = QQ.zero
    for point, size in sample_points(dim, radius):
        weight = QQ.one / size**nu
        for jet in jets:
            value = abs(evaluate(jet, point)) * weight
            if value > best:
                best = value
    return best
