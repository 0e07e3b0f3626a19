"""Dynamic time warping of demonstrations onto a common reference timeline.

The distance metric is the Euclidean distance over a chosen channel subset
(by default the Cartesian position channels, so units are never mixed).
Besides aligning the demonstrations, the warp supplies a derived state
channel: the local warp slope, i.e. how fast each demonstration ran relative
to the reference at every sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChannelKind, ChannelSchema, index_of, indices_of_kind
from .demolog import DemoSet

# Local warp slopes are clamped to this band; plateau steps in a warp path
# would otherwise produce zero or unbounded slopes.
RATE_CLAMP = (0.1, 10.0)


class AlignmentError(ValueError):
    pass


def dtw_path(a: np.ndarray, b: np.ndarray):
    """Optimal warp between sequences ``a`` (n, d) and ``b`` (m, d).

    Steps are {(1,0), (0,1), (1,1)} with no window constraint; cost is the
    sum of Euclidean distances over every path node including both endpoints.
    Backtracking ties prefer the diagonal step for determinism.

    Returns (cost, pairs) where pairs is an (L, 2) int array of (i, j) index
    pairs from (0, 0) to (n-1, m-1), monotone in both coordinates.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise AlignmentError("cannot align an empty trajectory")
    n, m = a.shape[0], b.shape[0]

    diff = a[:, None, :] - b[None, :, :]
    local = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        row = acc[i]
        prev = acc[i - 1]
        lrow = local[i - 1]
        for j in range(1, m + 1):
            row[j] = lrow[j - 1] + min(prev[j - 1], prev[j], row[j - 1])

    i, j = n - 1, m - 1
    pairs = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, up, left = acc[i, j], acc[i, j + 1], acc[i + 1, j]
            if diag <= up and diag <= left:
                i, j = i - 1, j - 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        pairs.append((i, j))
    pairs.reverse()
    return float(acc[n, m]), np.array(pairs, dtype=int)


def pairs_to_index_map(pairs: np.ndarray, n_ref: int) -> np.ndarray:
    """Collapse a pair path to one demo index per reference index.

    Where the path dwells on a reference sample, the median paired demo index
    is taken; the endpoints are pinned to the sequence endpoints so the map
    always covers (0 -> 0) and (n_ref-1 -> m-1).
    """
    index_map = np.empty(n_ref, dtype=int)
    ref = pairs[:, 0]
    demo = pairs[:, 1]
    for t in range(n_ref):
        js = demo[ref == t]
        index_map[t] = js[len(js) // 2]
    index_map[0] = pairs[0, 1]
    index_map[-1] = pairs[-1, 1]
    return index_map


def warp_rate(index_map: np.ndarray) -> np.ndarray:
    """Local slope of the warp map (demo samples per reference sample).

    Central differences inside, one-sided at the ends, clamped to RATE_CLAMP.
    """
    n = len(index_map)
    if n == 1:
        return np.ones(1)
    rate = np.gradient(index_map.astype(float))
    return np.clip(rate, *RATE_CLAMP)


@dataclass
class WarpResult:
    """Alignment of all demonstrations to the reference demonstration."""

    reference_index: int
    pair_paths: list[np.ndarray]  # per demo, (L, 2) monotone pairs
    index_maps: list[np.ndarray]  # per demo, (T,) demo index per reference index
    costs: list[float]
    warped: np.ndarray  # (N, T, channels) resampled demonstrations
    rates: np.ndarray  # (N, T) local warp slope
    schema: list[ChannelSchema]

    @property
    def n_samples(self) -> int:
        return self.warped.shape[1]


def default_distance_channels(schema: list[ChannelSchema]) -> list[str]:
    idx = indices_of_kind(schema, ChannelKind.POSITION)
    if not idx:
        raise AlignmentError("schema has no position channels to align on")
    return [schema[i].name for i in idx]


def align(demos: DemoSet, distance_channels: list[str] | None = None) -> WarpResult:
    """Warp every demonstration onto the reference demonstration's timeline.

    The reference is the demonstration whose length is the median of all
    lengths (ties resolved toward the earlier demo), which keeps extreme
    warping to a minimum without preferring any particular operator.
    """
    if distance_channels is None:
        distance_channels = default_distance_channels(demos.schema)
    if not distance_channels:
        raise AlignmentError("distance_channels must be non-empty")
    cols = [index_of(demos.schema, name) for name in distance_channels]

    lengths = np.array([len(d) for d in demos.demos])
    order = np.argsort(lengths, kind="stable")
    reference_index = int(order[(len(order) - 1) // 2])
    ref = demos.demos[reference_index].values[:, cols]
    n_ref = len(ref)

    pair_paths: list[np.ndarray] = []
    index_maps: list[np.ndarray] = []
    costs: list[float] = []
    warped = np.empty((demos.n_demos, n_ref, len(demos.schema)))
    rates = np.empty((demos.n_demos, n_ref))

    for i, demo in enumerate(demos.demos):
        cost, pairs = dtw_path(ref, demo.values[:, cols])
        index_map = pairs_to_index_map(pairs, n_ref)
        pair_paths.append(pairs)
        index_maps.append(index_map)
        costs.append(cost)
        warped[i] = demo.values[index_map]
        rates[i] = warp_rate(index_map)

    return WarpResult(
        reference_index=reference_index,
        pair_paths=pair_paths,
        index_maps=index_maps,
        costs=costs,
        warped=warped,
        rates=rates,
        schema=list(demos.schema),
    )


def resample_to_reference(warp: WarpResult) -> tuple[np.ndarray, list[ChannelSchema]]:
    """Warped demonstration matrix with the warp slope appended as a channel.

    Returns ((N, T, channels+1) matrix, extended schema). The appended
    channel is the execution-rate state variable used by the rest of the
    pipeline.
    """
    n, t, _ = warp.warped.shape
    out = np.concatenate([warp.warped, warp.rates.reshape(n, t, 1)], axis=2)
    schema = list(warp.schema) + [ChannelSchema("rate", ChannelKind.EXEC_RATE)]
    return out, schema
