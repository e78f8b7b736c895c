"""Print a few facts about each shipped Bratteli fixture: Perron data,
sample comparisons, and compacts below an infinite class."""
import argparse

from cu_kit import af
from cu_kit.core import INF
from cu_kit.limit import embed, thread_leq, thread_way_below


def describe(name, horizon, count):
    b = af.load_fixture(name)
    d = af.to_cu_diagram(b)
    k = d.stage(1).dim
    print(f"== {name}: stage dims {k}, tail matrix {list(map(list, d.tail_map.matrix))}")
    for f in d.functionals:
        kind = "exact" if f.exact else "float"
        print(f"   functional on {f.support}: rho={f.rho} ({kind})")
    unit = embed(d, 1, (1,) + (0,) * (k - 1))
    later = embed(d, 2, (1,) + (0,) * (k - 1))
    for x, y, tag in ((later, unit, "e@2 <= e@1"), (unit, later, "e@1 <= e@2")):
        v = thread_leq(x, y, horizon)
        print(f"   {tag}: {v.value.value}" + (f" ({v.certificate})" if v.certificate else ""))
    inf = embed(d, 1, (INF,) * k)
    print(f"   inf << inf: {thread_way_below(inf, inf, horizon).value.value}")
    try:
        print(f"   trace(e@1) = {af.format_value(af.perron_trace(b, unit))}")
    except af.NotPrimitive as e:
        print(f"   trace: {e}")
    terms = af.compacts_below(b, inf, count, horizon)
    print("   compacts below inf: " + "  ".join(t.encode() for t in terms))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--horizon", type=int, default=40)
    p.add_argument("--count", type=int, default=4)
    args = p.parse_args()
    for name in af.FIXTURE_NAMES:
        describe(name, args.horizon, args.count)


if __name__ == "__main__":
    main()
