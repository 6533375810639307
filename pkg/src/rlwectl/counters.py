"""Instrumented operation counters.

The per-step cost tables for the two controllers are stated in terms of
logical operations (Enc, Dec, homomorphic add, external product, pack /
unpack calls).  Counting happens at the call sites of those logical
operations; work performed inside a ciphertext-unpacking call is
recorded separately so "direct" per-step counts can be compared against
the closed-form formulas while the unpack-internal external products
can be checked against tau - 1 per call.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field


@dataclass
class OpCounter:
    enc: int = 0
    dec: int = 0
    ct_add: int = 0
    ext_prod: int = 0
    pack_calls: int = 0
    unpack_pt_calls: int = 0
    unpack_ct_calls: int = 0
    unpack_ct_add: int = 0
    unpack_ext_prod: int = 0
    _unpack_depth: int = field(default=0, repr=False)

    def count_enc(self, k: int = 1):
        self.enc += k

    def count_dec(self, k: int = 1):
        self.dec += k

    def count_add(self, k: int = 1):
        if self._unpack_depth:
            self.unpack_ct_add += k
        else:
            self.ct_add += k

    def count_ext_prod(self, k: int = 1):
        if self._unpack_depth:
            self.unpack_ext_prod += k
        else:
            self.ext_prod += k

    @contextmanager
    def unpack_scope(self):
        self.unpack_ct_calls += 1
        self._unpack_depth += 1
        try:
            yield self
        finally:
            self._unpack_depth -= 1

    def snapshot(self) -> dict:
        return {
            k: getattr(self, k)
            for k in (
                "enc",
                "dec",
                "ct_add",
                "ext_prod",
                "pack_calls",
                "unpack_pt_calls",
                "unpack_ct_calls",
                "unpack_ct_add",
                "unpack_ext_prod",
            )
        }

    def diff(self, before: dict) -> dict:
        return {k: v - before[k] for k, v in self.snapshot().items()}
