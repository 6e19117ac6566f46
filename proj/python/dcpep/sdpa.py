"""Reader for SDPA sparse files (.dat-s).

The format describes the pair

    (P) min  c'x   s.t.  X = sum_k x_k F_k - F_0,  X >= 0
    (D) max  tr(F_0 Y)  s.t.  tr(F_k Y) = c_k,  Y >= 0,

with all matrices block diagonal; a negative block size marks a block
constrained to be diagonal.
"""

import numpy as np

__all__ = ["read_sdpa"]


def _tokens(text):
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped[0] in '"*':
            continue
        for raw in stripped.replace(",", " ").replace("{", " ").replace("}", " ").split():
            yield raw


def read_sdpa(text):
    """Parse SDPA sparse text into ``(c, blocks, mats)``.

    ``c`` is the length-m right-hand-side vector, ``blocks`` the signed
    block-size list, and ``mats`` a list of m+1 per-block matrix lists
    (``mats[0]`` is F_0).  PSD blocks come back as dense symmetric arrays,
    diagonal blocks as 1-D arrays of their diagonal.
    """
    stream = _tokens(text)
    try:
        m = int(next(stream))
        nblocks = int(next(stream))
        blocks = [int(next(stream)) for _ in range(nblocks)]
        c = np.array([float(next(stream)) for _ in range(m)])
    except StopIteration:
        raise ValueError("truncated SDPA header") from None

    def empty_blocks():
        return [
            np.zeros(-size) if size < 0 else np.zeros((size, size))
            for size in blocks
        ]

    mats = [empty_blocks() for _ in range(m + 1)]
    entries = list(stream)
    if len(entries) % 5 != 0:
        raise ValueError("SDPA entry list is not made of 5-tuples")
    for pos in range(0, len(entries), 5):
        matno = int(entries[pos])
        blkno = int(entries[pos + 1])
        i = int(entries[pos + 2])
        j = int(entries[pos + 3])
        value = float(entries[pos + 4])
        if not 0 <= matno <= m or not 1 <= blkno <= nblocks:
            raise ValueError(f"entry ({matno}, {blkno}) out of range")
        block = mats[matno][blkno - 1]
        if block.ndim == 1:
            if i != j:
                raise ValueError("off-diagonal entry in a diagonal block")
            block[i - 1] = value
        else:
            block[i - 1, j - 1] = value
            block[j - 1, i - 1] = value
    return c, blocks, mats
