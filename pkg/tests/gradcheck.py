"""Central finite-difference oracle shared by the net and acceptance tests."""
import numpy as np

from wvae.net import backward, forward


def loss_fn(net, x, seed, **loss_kw):
    def f():
        _, tape = forward(net, x, seed=seed)
        return tape.loss(**loss_kw).total
    return f


def check_gradients(net, x, seed, step=1e-5, floor=1e-8, **loss_kw):
    """Return ``(worst_relative_error, checked_count, per_param)``.

    Relative error is ``|a - n| / max(|a|, |n|)``, evaluated on entries whose
    backprop gradient exceeds ``floor`` in magnitude.
    """
    _, tape = forward(net, x, seed=seed)
    grads = backward(tape, tape.loss(**loss_kw))
    f = loss_fn(net, x, seed, **loss_kw)
    worst, count, per = 0.0, 0, {}
    for name, p in net.parameters().items():
        g = grads[name]
        pw = 0.0
        for i in range(p.size):
            old = p.flat[i]
            p.flat[i] = old + step
            up = f()
            p.flat[i] = old - step
            down = f()
            p.flat[i] = old
            num = (up - down) / (2 * step)
            ana = g.flat[i]
            if abs(ana) > floor:
                pw = max(pw, abs(ana - num) / max(abs(ana), abs(num)))
                count += 1
        per[name] = pw
        worst = max(worst, pw)
    return worst, count, per
