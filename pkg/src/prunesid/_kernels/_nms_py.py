"""Pure-Python greedy suppression kernel (fallback for the compiled one)."""

import numpy as np


def greedy_nms_block(block, order, tau):
    """Greedy keep/suppress sweep over a local similarity block.

    ``block`` is an n-by-n similarity matrix for one group, ``order`` the
    visit order (local indices, best candidate first). A candidate is kept
    iff its similarity to every previously kept candidate is < ``tau``; the
    first visited candidate is always kept. Returns kept local indices in
    visit order.
    """
    kept: list[int] = []
    for i in order:
        if kept and block[i, kept].max() >= tau:
            continue
        kept.append(int(i))
    return np.asarray(kept, dtype=np.intp)
