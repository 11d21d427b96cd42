from django.conf import settings

# Mass conservation and exact-equality checks.
MASS_TOL = 1e-9
# Branch probabilities at a single node.
NODE_TOL = 1e-12
# Values closer than this are one atom.
MERGE_TOL = 1e-12


def tolerance(tol=None):
    return settings.DECOUPLE_TOL if tol is None else float(tol)


def enumeration_cap(cap=None):
    return settings.DECOUPLE_CAP if cap is None else int(cap)
