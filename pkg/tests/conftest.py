import sys
from pathlib import Path

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from letrw.terms import BOT, ConApp, FunApp, Let, Var  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

VARS = ("X", "Y", "Z")
CONS = (("z", 0), ("s", 1), ("c", 2))
FUNS = (("f", 1), ("g", 0), ("h", 2))


def cterms(partial=False, variables=VARS, max_leaves=6):
    leaves = [st.just(ConApp("z"))] + [st.just(Var(v)) for v in variables]
    if partial:
        leaves.append(st.just(BOT))
    return st.recursive(
        st.one_of(leaves),
        lambda kids: st.one_of(
            kids.map(lambda a: ConApp("s", (a,))),
            st.tuples(kids, kids).map(lambda ab: ConApp("c", ab)),
        ),
        max_leaves=max_leaves,
    )


def exprs(lets=True, partial=False, variables=VARS, max_leaves=8):
    leaves = [st.just(ConApp("z")), st.just(FunApp("g"))] + [st.just(Var(v)) for v in variables]
    if partial:
        leaves.append(st.just(BOT))

    def grow(kids):
        options = [
            kids.map(lambda a: ConApp("s", (a,))),
            st.tuples(kids, kids).map(lambda ab: ConApp("c", ab)),
            kids.map(lambda a: FunApp("f", (a,))),
            st.tuples(kids, kids).map(lambda ab: FunApp("h", ab)),
        ]
        if lets:
            options.append(st.tuples(st.sampled_from(variables), kids, kids).map(lambda t: Let(*t)))
        return st.one_of(options)

    return st.recursive(st.one_of(leaves), grow, max_leaves=max_leaves)
