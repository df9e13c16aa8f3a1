"""Tile-parallel GGR over a ``k x k`` worker grid.

The ``n x n`` matrix is cut into square blocks of edge ``block`` and block
``(bi, bj)`` lives on worker ``(bi mod k, bj mod k)``. Workers own their
blocks exclusively and only exchange immutable messages with the
coordinator. Per pivot column there are three barriers:

1. gather: owners of the pivot column send their segment of ``v`` with its
   local bottom-up sum of squares; the pivot owner chains the segment sums
   bottom-up and builds the column transform;
2. scan: with the transform broadcast, every worker forms the local partial
   inner sums of its trailing blocks and reports block totals and its last
   row (the halo the block below needs);
3. update: carries (sum of the totals of all lower blocks, chained
   bottom-up) and halos go back out; every worker rewrites its blocks.

All combination orders are fixed, so runs are bitwise reproducible. The
cost model at the bottom replays the same schedule with unit costs.
"""

import math
import queue
import threading
import time
from dataclasses import dataclass

import numpy as np

from .counting import OpCounter
from .errors import ContractError, GridConfigError, WorkerError
from .ggr import _reverse_cumsum, kl_vectors, row1_kernel, rows_kernel
from .matcore import FactorizationResult, as_fortran, sign_normalize


@dataclass(frozen=True)
class TileGrid:
    n: int
    k: int
    block: int

    @property
    def nblocks(self):
        return self.n // self.block

    def owner(self, bi, bj):
        return (bi % self.k, bj % self.k)

    def worker_id(self, bi, bj):
        p, q = self.owner(bi, bj)
        return p * self.k + q

    def owned_blocks(self, worker):
        p, q = divmod(worker, self.k)
        nb = self.nblocks
        return [(bi, bj) for bi in range(p, nb, self.k) for bj in range(q, nb, self.k)]

    def ownership(self):
        """``nblocks x nblocks`` array of worker ids."""
        idx = np.arange(self.nblocks) % self.k
        return idx[:, None] * self.k + idx[None, :]


def partition(n, k, block=None):
    """Block-cyclic layout of an ``n x n`` matrix; ``block`` defaults to n/k."""
    if k < 1 or n < 1:
        raise GridConfigError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if block is None:
        if n % k:
            raise GridConfigError(f"n={n} not divisible by k={k}; pass block explicitly")
        block = n // k
    if block < 1 or n % block:
        raise GridConfigError(f"n={n} not divisible by block={block} (k={k})")
    return TileGrid(int(n), int(k), int(block))


class _Worker:
    """One tile: owns blocks, answers coordinator commands."""

    def __init__(self, wid, grid):
        self.wid = wid
        self.grid = grid
        self.blocks = {}
        self.counter = OpCounter()
        self._scans = {}

    def _trailing(self, j):
        """Owned blocks intersecting rows >= j and columns > j."""
        b = self.grid.block
        for (bi, bj), blk in self.blocks.items():
            if (bi + 1) * b <= j or (bj + 1) * b <= j + 1:
                continue
            yield bi, bj, blk

    def load(self, blocks):
        self.blocks = {key: np.array(v, order="F") for key, v in blocks.items()}
        self.counter = OpCounter()

    def gather(self, j):
        b = self.grid.block
        pb = j // b
        out = []
        for (bi, bj), blk in sorted(self.blocks.items()):
            if bj != pb or (bi + 1) * b <= j:
                continue
            r0 = max(bi * b, j)
            seg = blk[r0 - bi * b :, j - bj * b].copy()
            self.counter.tally(mul=seg.size, add=seg.size - 1)
            out.append((bi, seg, _reverse_cumsum(seg * seg)))
        return out

    def build(self, segments, sign_mode="positive"):
        """Chain the segment sums bottom-up, finish the tail norms, build
        the transform (pivot owner only)."""
        carry = None
        sums = []
        for _, _, scan in reversed(segments):
            if carry is not None:
                scan = scan + carry
                self.counter.tally(add=scan.size)
            sums.append(scan)
            carry = scan[0]
        ss = np.concatenate(sums[::-1])
        v = np.concatenate([seg for _, seg, _ in segments])
        self.counter.tally(sqrt=ss.size)
        return kl_vectors(v, np.sqrt(ss), self.counter, sign_mode)

    def scan(self, j, tr):
        b = self.grid.block
        self._scans = {}
        out = {}
        for bi, bj, blk in self._trailing(j):
            r0, c0 = bi * b, bj * b
            ra, rs, cs = max(r0, j), max(r0, j + 1), max(c0, j + 1)
            cols = slice(cs - c0, b)
            if rs < r0 + b:
                prod = tr.v[rs - j : r0 + b - j, None] * blk[rs - r0 :, cols]
                local = _reverse_cumsum(prod)
                self.counter.tally(mul=prod.size, add=prod.size - prod.shape[1])
                total = local[0]
            else:
                local, total = None, None
            self._scans[(bi, bj)] = local
            out[(bi, bj)] = (total, blk[-1, cols].copy(), ra - r0)
        return out

    def update(self, j, tr, links):
        b = self.grid.block
        pb = j // b
        for bi, bj, blk in self._trailing(j):
            r0, c0 = bi * b, bj * b
            ra, rs, cs = max(r0, j), max(r0, j + 1), max(c0, j + 1)
            cols = slice(cs - c0, b)
            carry, halo = links[(bi, bj)]
            local = self._scans[(bi, bj)]
            if local is not None and carry is not None:
                s_here = local + carry
                self.counter.tally(add=s_here.size)
            else:
                s_here = local
            old = blk[ra - r0 :, cols]
            new = np.empty_like(old)
            if ra == j:
                s0 = s_here[0] if s_here is not None else carry
                new[0] = row1_kernel(tr, old[0], s0, self.counter)
                above = old[:-1]
                here = old[1:]
            else:
                above = np.vstack([halo[None, :], old[:-1]])
                here = old
            if here.shape[0]:
                new[new.shape[0] - here.shape[0] :] = rows_kernel(
                    tr, above, here, s_here, rs - j, self.counter
                )
            blk[ra - r0 :, cols] = new
        for (bi, bj), blk in self.blocks.items():
            if bj == pb and (bi + 1) * b > j:
                col = j - bj * b
                r0 = max(bi * b, j)
                blk[r0 - bi * b :, col] = 0.0
                if bi == pb:
                    blk[j - bi * b, col] = tr.diag
        self._scans = {}

    def collect(self):
        return self.blocks, self.counter


class TilePool:
    """Fixed pool of ``k * k`` worker threads fed through per-worker inboxes."""

    def __init__(self, k):
        if k < 1:
            raise GridConfigError(f"k must be >= 1, got {k}")
        self.k = k
        self._threads = []
        self._inboxes = []
        self._outbox = queue.Queue()
        self._workers = []

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.close()

    def start(self):
        for wid in range(self.k * self.k):
            inbox = queue.Queue()
            t = threading.Thread(target=self._serve, args=(wid, inbox), daemon=True)
            self._inboxes.append(inbox)
            self._threads.append(t)
            t.start()

    def close(self):
        for inbox in self._inboxes:
            inbox.put(None)
        for t in self._threads:
            t.join()
        self._threads, self._inboxes = [], []

    def _serve(self, wid, inbox):
        while True:
            msg = inbox.get()
            if msg is None:
                return
            method, kwargs = msg
            try:
                result = getattr(self._workers[wid], method)(**kwargs)
            except Exception as exc:  # reported to the coordinator
                self._outbox.put((wid, None, exc))
            else:
                self._outbox.put((wid, result, None))

    def _call(self, calls, stage):
        """Send ``{wid: (method, kwargs)}`` and wait for every reply."""
        for wid, msg in calls.items():
            self._inboxes[wid].put(msg)
        replies, failures = {}, []
        for _ in calls:
            wid, result, exc = self._outbox.get()
            if exc is not None:
                failures.append((wid, exc))
            replies[wid] = result
        if failures:
            wid, exc = min(failures, key=lambda f: f[0])
            raise WorkerError(f"worker {wid} failed during {stage}: {exc!r}") from exc
        return replies

    def factorize(self, a, grid, sign_mode="positive"):
        if grid.k != self.k:
            raise GridConfigError(f"pool has k={self.k}, grid has k={grid.k}")
        if not self._threads:
            raise RuntimeError("pool is not running")
        start = time.perf_counter()
        r = as_fortran(a)
        n = grid.n
        if r.shape != (n, n):
            raise ContractError(f"parallel_ggr needs a {n}x{n} matrix, got {r.shape}")
        b, nb = grid.block, grid.nblocks
        nw = self.k * self.k
        self._workers = [_Worker(w, grid) for w in range(nw)]
        everyone = range(nw)
        self._call(
            {
                w: ("load", {"blocks": {
                    (bi, bj): r[bi * b : (bi + 1) * b, bj * b : (bj + 1) * b]
                    for bi, bj in grid.owned_blocks(w)
                }})
                for w in everyone
            },
            "load",
        )
        coord = OpCounter()
        for j in range(n - 1):
            pb = j // b
            got = self._call({w: ("gather", {"j": j}) for w in everyone}, f"gather j={j}")
            segments = sorted(
                (seg for w in everyone for seg in got[w]), key=lambda s: s[0]
            )
            pivot = grid.worker_id(pb, pb)
            tr = self._call(
                {pivot: ("build", {"segments": segments, "sign_mode": sign_mode})},
                f"build j={j}",
            )[pivot]
            got = self._call(
                {w: ("scan", {"j": j, "tr": tr}) for w in everyone}, f"scan j={j}"
            )
            info = {}
            for w in everyone:
                info.update(got[w])
            links = {w: {} for w in everyone}
            for bj in range(pb, nb):
                carry = None
                for bi in range(nb - 1, pb - 1, -1):
                    if (bi, bj) not in info:
                        continue
                    total = info[(bi, bj)][0]
                    above = info.get((bi - 1, bj))
                    halo = above[1] if above is not None and bi > pb else None
                    links[grid.worker_id(bi, bj)][(bi, bj)] = (carry, halo)
                    if total is not None:
                        if carry is None:
                            carry = total
                        else:
                            carry = total + carry
                            coord.tally(add=carry.size)
            self._call(
                {w: ("update", {"j": j, "tr": tr, "links": links[w]}) for w in everyone},
                f"update j={j}",
            )
        got = self._call({w: ("collect", {}) for w in everyone}, "collect")
        counts = coord
        for w in everyone:
            blocks, counter = got[w]
            counts = counts.merge(counter)
            for (bi, bj), blk in blocks.items():
                r[bi * b : (bi + 1) * b, bj * b : (bj + 1) * b] = blk
        if sign_mode == "positive":
            sign_normalize(r)
        return FactorizationResult(r=r, counts=counts, elapsed=time.perf_counter() - start)


def parallel_ggr(a, grid, workers=None, sign_mode="positive"):
    """GGR on ``grid``; R matches :func:`~ggrqr.ggr.ggr_factorize` up to the
    reassociation of the segmented sums (bitwise when there is one block)."""
    if workers is not None:
        return workers.factorize(a, grid, sign_mode)
    with TilePool(grid.k) as pool:
        return pool.factorize(a, grid, sign_mode)


@dataclass(frozen=True)
class CostReport:
    serial_units: int
    parallel_units: int
    speedup: float
    comm_units: int
    critical_path_units: int


def cost_model_run(n, k, block=None, gamma=0.1):
    """Replay the tile schedule with 1 unit per multiply/divide and ``gamma``
    units per word received from another worker.

    Per pivot column the makespan is the pivot owner's gather + transform
    time followed by the slowest worker's receive + update time.
    """
    grid = partition(n, k, block)
    b, nb = grid.block, grid.nblocks
    starts = np.arange(nb) * b
    ends = starts + b
    residue = np.arange(nb) % k
    serial = 0
    makespan = 0.0
    words = 0
    critical = 0
    for j in range(n - 1):
        L, pb = n - j, j // b
        transform = L + 3 * (L - 2) + 2
        live = np.arange(nb) >= pb
        active_rows = np.where(live, ends - np.maximum(starts, j), 0)
        lower_rows = np.where(live, ends - np.maximum(starts, j + 1), 0)
        row_cost = 3 * lower_rows + 2 * (np.arange(nb) == pb)
        tcols = np.clip(ends - np.maximum(starts, j + 1), 0, None)
        rc = np.bincount(residue, weights=row_cost, minlength=k).astype(np.int64)
        tc = np.bincount(residue, weights=tcols, minlength=k).astype(np.int64)
        update = np.multiply.outer(rc, tc)
        serial += transform + int(update.sum())
        critical += transform + 3
        if k == 1:
            makespan += transform + int(update.sum())
            continue
        pivot_p = pb % k
        gather = 2 * int(active_rows[live & (residue != pivot_p)].sum())
        links = (live & (np.arange(nb) > pb)).astype(np.int64) + (
            live & (np.arange(nb) < nb - 1)
        ).astype(np.int64)
        hc = np.bincount(residue, weights=links, minlength=k).astype(np.int64)
        recv = np.multiply.outer(hc, tc)
        bcast = np.full((k, k), 4 * L)
        bcast[pivot_p, pivot_p] = 0
        per_worker = gamma * (bcast + recv) + update
        makespan += gamma * gather + transform + float(per_worker.max())
        words += gather + int(bcast.sum()) + int(recv.sum())
    parallel = math.ceil(makespan - 1e-9) if k > 1 else int(makespan)
    return CostReport(
        serial_units=serial,
        parallel_units=parallel,
        speedup=serial / parallel,
        comm_units=math.ceil(gamma * words),
        critical_path_units=critical,
    )
