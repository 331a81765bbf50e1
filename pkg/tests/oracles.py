"""Independent reference implementations shared by the unit and acceptance tests.

The brute-force evaluator shares no code with ``protofair.evaluation``; the
gradient helpers compare analytic gradients against central differences.
"""

import math

import numpy as np

from protofair.model import PrototypeModel, init_model
from protofair.training import (
    distributing_reg, proto_collab_reg, rec_loss_item, rec_loss_user, zerosum_reg,
)

H = 1e-5


def central_differences(f, params, h=H):
    grads = {}
    for name, p in params.items():
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + h
            up = f()
            p[idx] = old - h
            down = f()
            p[idx] = old
            g[idx] = (up - down) / (2 * h)
        grads[name] = g
    return grads


def max_rel_error(analytic, numeric):
    """Largest |a - n| / max(1, |n|) over all entries of all parameters."""
    worst = 0.0
    for name, n in numeric.items():
        a = analytic.get(name, np.zeros_like(n))
        worst = max(worst, float(np.max(np.abs(a - n) / np.maximum(1.0, np.abs(n)))))
    return worst


def random_instance(seed, kind="protomf"):
    """A small random model with generic (non-tied) parameters and a batch."""
    rng = np.random.default_rng(seed)
    N, M = int(rng.integers(3, 7)), int(rng.integers(4, 9))
    d, Lu, Li = int(rng.integers(2, 5)), int(rng.integers(1, 4)), int(rng.integers(1, 4))
    ku, ki = int(rng.integers(1, Lu + 1)), int(rng.integers(1, Li + 1))
    model = init_model(kind, N, M, d, Lu, Li, ku, ki, rng)
    for p in model.params().values():
        p[...] = rng.normal(size=p.shape)
    B, n = int(rng.integers(1, 5)), int(rng.integers(1, 4))
    batch = dict(users=rng.integers(N, size=B), items=rng.integers(M, size=B),
                 neg_items=rng.integers(M, size=(B, n)), neg_users=rng.integers(N, size=(B, n)))
    return model, batch, rng


def gradient_errors(seed, kind="protomf", use_filtering=True):
    """Max relative error of every loss component on one random instance."""
    model, b, rng = random_instance(seed, kind)
    params = model.params()
    out = {}

    _, g = rec_loss_user(model, b["users"], b["items"], b["neg_items"], use_filtering)
    num = central_differences(
        lambda: rec_loss_user(model, b["users"], b["items"], b["neg_items"], use_filtering)[0], params)
    out["rec_user"] = max_rel_error(g, num)

    _, g = rec_loss_item(model, b["items"], b["users"], b["neg_users"], use_filtering)
    num = central_differences(
        lambda: rec_loss_item(model, b["items"], b["users"], b["neg_users"], use_filtering)[0], params)
    out["rec_item"] = max_rel_error(g, num)

    # ZeroSum through the model scores, user side
    def zs_value():
        cands = np.concatenate([b["items"][:, None], b["neg_items"]], axis=1)
        s = model.score(b["users"][:, None], cands, use_filtering)
        return zerosum_reg(s[:, 0], s[:, 1:])[0]

    out["zerosum"] = max_rel_error(_zerosum_grads(model, b, use_filtering),
                                   central_differences(zs_value, params))

    if isinstance(model, PrototypeModel):
        for side, E, P in (("user", model.U, model.Pu), ("item", model.I, model.Pi)):
            w1, w2 = rng.uniform(0.1, 2.0, size=2)
            _, _, dE, dP = proto_collab_reg(E, P, w1, w2)

            def collab():
                r1, r2, _, _ = proto_collab_reg(E, P)
                return w1 * r1 + w2 * r2

            out[f"collab_{side}"] = max_rel_error({"E": dE, "P": dP},
                                                  central_differences(collab, {"E": E, "P": P}))
            _, dP = distributing_reg(P)
            out[f"dist_{side}"] = max_rel_error(
                {"P": dP}, central_differences(lambda: distributing_reg(P)[0], {"P": P}))
    return out


def _zerosum_grads(model, b, use_filtering):
    from protofair.training import _Tape  # backprop of arbitrary score gradients
    cands = np.concatenate([b["items"][:, None], b["neg_items"]], axis=1)
    tape = _Tape(model, use_filtering)
    pair = (b["users"][:, None], cands)
    s = tape.scores(*pair)
    _, dpos, dneg = zerosum_reg(s[:, 0], s[:, 1:])
    tape.backprop_scores(*pair, np.concatenate([dpos[:, None], dneg], axis=1))
    return tape.grads()


# ---------------------------------------------------------------------------
# brute-force evaluator

def brute_force_report(score, positives, negatives, under, over, long_tail):
    """Metrics by explicit sorting of python lists.

    ``score(u, i)`` returns a float; ``under``/``over``/``long_tail`` are sets
    of item ids. Returns a dict keyed like :class:`EvalReport` fields.
    """
    hits, gains = [], []
    pos_lists = {"under": [], "over": [], "long_tail": []}
    for u, (p, negs) in enumerate(zip(positives, negatives)):
        cands = [int(p)] + [int(x) for x in negs]
        ranked = sorted(cands, key=lambda i: (-score(u, i), i))
        rank = ranked.index(int(p)) + 1
        hits.append(1.0 if rank <= 10 else 0.0)
        gains.append(1.0 / math.log2(rank + 1) if rank <= 10 else 0.0)
        for pos, item in enumerate(ranked, start=1):
            for name, members in (("under", under), ("over", over), ("long_tail", long_tail)):
                if item in members:
                    pos_lists[name].append(pos)

    def mean(xs):
        return sum(xs) / len(xs) if xs else None

    return {"hr_at_10": math.fsum(hits) / len(hits), "ndcg_at_10": math.fsum(gains) / len(gains),
            "mu_under": mean(pos_lists["under"]), "mu_over": mean(pos_lists["over"]),
            "mu_long_tail": mean(pos_lists["long_tail"])}
