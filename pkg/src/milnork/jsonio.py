"""JSON encodings for the domain types and canonical serialization.

All emitted JSON is canonical: sorted keys, compact separators, one trailing
newline; byte-identical output is part of the pipeline contract.
"""

import json

from .groundfield import INF, CoordValuation, RatFunc, SparsePoly
from .kmilnor import Certificate, ParshinChain, Symbol


SCHEMA_VERSION = 1


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def encode_ground(x):
    return {"level": x.level, "coeffs": list(x.coeffs)}


def decode_ground(tower, data):
    return tower.element(data["level"], data["coeffs"])


def encode_poly(f):
    terms = [{"exp": list(e), "coef": encode_ground(c)}
             for e, c in sorted(f.terms.items())]
    return {"vars": f.nvars, "terms": terms}


def decode_poly(tower, data):
    terms = {}
    for t in data["terms"]:
        terms[tuple(t["exp"])] = decode_ground(tower, t["coef"])
    return SparsePoly(data["vars"], terms)


def encode_ratfunc(f):
    return {"num": encode_poly(f.num), "den": encode_poly(f.den)}


def decode_ratfunc(tower, data):
    return RatFunc(decode_poly(tower, data["num"]), decode_poly(tower, data["den"]))


def encode_symbol(s):
    return [encode_ratfunc(e) for e in s.entries]


def decode_symbol(tower, data):
    return Symbol([decode_ratfunc(tower, e) for e in data])


def encode_center(c):
    return "inf" if c is INF else encode_ground(c)


def decode_center(tower, data):
    return INF if data == "inf" else decode_ground(tower, data)


def encode_chain(chain):
    return {
        "steps": [{"var": v.var, "center": encode_center(v.center)}
                  for v in chain.steps],
        "uniformizers": [encode_ratfunc(u) for u in chain.uniformizers],
        "ram_indices": list(chain.ram_indices),
        "covers": [{"var": var, "exp": e, "center": encode_center(c)}
                   for var, e, c in chain.covers],
    }


def decode_chain(field, data):
    steps = [CoordValuation(s["var"], decode_center(field.tower, s["center"]),
                            field.nvars)
             for s in data["steps"]]
    if len({v.var for v in steps}) != len(steps):
        raise ValueError("chain steps must use distinct variables")
    unis = [decode_ratfunc(field.tower, u) for u in data["uniformizers"]]
    covers = [(c["var"], c["exp"], decode_center(field.tower, c["center"]))
              for c in data.get("covers", [])]
    return ParshinChain(field, steps, unis, tuple(data["ram_indices"]),
                        covers=covers, validate=False)


def encode_certificate(cert):
    out = {
        "statement": encode_symbol(cert.statement),
        "chain": encode_chain(cert.chain),
        "value": cert.value,
        "ell": cert.ell,
    }
    if cert.transform is not None:
        out["transform"] = [list(row) for row in cert.transform]
    return out


def decode_certificate(field, data):
    transform = data.get("transform")
    if transform is not None:
        transform = tuple(tuple(row) for row in transform)
    return Certificate(
        decode_symbol(field.tower, data["statement"]),
        decode_chain(field, data["chain"]),
        data["value"],
        data["ell"],
        transform=transform,
    )


def encode_abc_group(G):
    return {"rank": G.rank, "ell": G.ell,
            "relations": [list(v) for v in G.relations.basis]}


def decode_abc_group(data):
    from .abelcentral import AbcGroup

    return AbcGroup(data["rank"], data["ell"],
                    [tuple(v) for v in data.get("relations", [])])


def encode_divisor(div):
    out = []
    for k, v in div.items():
        if k == "inf":
            out.append({"point": "inf", "coeff": v})
        else:
            level, coeffs = k
            out.append({"point": {"level": level, "coeffs": list(coeffs)},
                        "coeff": v})
    out.sort(key=lambda e: json.dumps(e, sort_keys=True))
    return out
