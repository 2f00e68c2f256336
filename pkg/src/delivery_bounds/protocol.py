"""Protocol trees: GENERATE leaves and RESTART-UNTIL-SUCCESS nodes.

A tree is a value.  Each child position stands for an independent copy of
that sub-protocol, so the same ``ProtocolNode`` object may safely appear
several times (``build_repeater`` relies on this to keep trees small).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from .errors import InvalidParameterError, ProtocolParseError

GENERATE = "generate"
RUS = "rus"

_FIELDS = {"kind", "p", "bound_mode", "children", "label"}


@dataclass(frozen=True)
class ProtocolNode:
    kind: Literal["generate", "rus"]
    p: float
    bound_mode: bool = False
    children: tuple["ProtocolNode", ...] = ()
    label: str = ""
    _key: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if self.kind not in (GENERATE, RUS):
            raise InvalidParameterError(f"unknown node kind {self.kind!r}")
        if isinstance(self.p, bool) or not (0.0 < float(self.p) <= 1.0):
            raise InvalidParameterError(f"p={self.p!r} must lie in (0, 1]")
        object.__setattr__(self, "p", float(self.p))
        if self.kind == GENERATE and self.children:
            raise InvalidParameterError("a generate node cannot have children")
        if self.kind == RUS and not self.children:
            raise InvalidParameterError("a restart-until-success node needs children")
        for c in self.children:
            if not isinstance(c, ProtocolNode):
                raise InvalidParameterError("children must be ProtocolNode instances")
        key = (self.kind, self.p, bool(self.bound_mode),
               tuple(c._key for c in self.children))
        object.__setattr__(self, "_key", key)

    @property
    def structure(self) -> tuple:
        """Hashable description ignoring labels; equal for identical sub-protocols."""
        return self._key

    @property
    def is_leaf(self) -> bool:
        return self.kind == GENERATE

    def leaf_count(self) -> int:
        if self.is_leaf:
            return 1
        return sum(c.leaf_count() for c in self.children)

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(c.depth() for c in self.children)

    def has_bound_mode(self) -> bool:
        return self.bound_mode or any(c.has_bound_mode() for c in self.children)

    def walk(self):
        """Yield every node position in pre-order (shared objects repeat)."""
        yield self
        for c in self.children:
            yield from c.walk()


def generate(p: float, label: str = "") -> ProtocolNode:
    return ProtocolNode(GENERATE, p, label=label)


def rus(p: float, children, bound_mode: bool = False, label: str = "") -> ProtocolNode:
    return ProtocolNode(RUS, p, bound_mode, tuple(children), label)


def distill(children, floor: float = 0.5, label: str = "distill") -> ProtocolNode:
    """Distillation node; only a lower bound on its success probability is known."""
    return rus(floor, children, bound_mode=True, label=label)


@dataclass(frozen=True)
class RepeaterSpec:
    nesting_levels: int
    p_gen: float
    p_swap: float
    gen_model: Literal["discrete", "exponential"] = "discrete"

    def __post_init__(self):
        if self.nesting_levels < 0:
            raise InvalidParameterError("nesting_levels must be >= 0")
        for name in ("p_gen", "p_swap"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise InvalidParameterError(f"{name}={v!r} must lie in (0, 1]")
        if self.gen_model not in ("discrete", "exponential"):
            raise InvalidParameterError(f"unknown gen_model {self.gen_model!r}")

    @property
    def segments(self) -> int:
        return 2 ** self.nesting_levels


@dataclass(frozen=True)
class SwitchSpec:
    k: int
    p_fuse: float
    arm: ProtocolNode

    def __post_init__(self):
        if self.k < 2:
            raise InvalidParameterError("a switch needs k >= 2 arms")
        if not (0.0 < self.p_fuse <= 1.0):
            raise InvalidParameterError(f"p_fuse={self.p_fuse!r} must lie in (0, 1]")
        if not isinstance(self.arm, ProtocolNode):
            raise InvalidParameterError("arm must be a ProtocolNode")


def build_repeater(spec: RepeaterSpec) -> ProtocolNode:
    """Symmetric nested swapping over ``2**n`` segments."""
    node = generate(spec.p_gen, label="link")
    for level in range(1, spec.nesting_levels + 1):
        node = rus(spec.p_swap, (node, node), label=f"swap{level}")
    return node


def build_switch(spec: SwitchSpec) -> ProtocolNode:
    """k identical arms feeding one probabilistic fusion."""
    return rus(spec.p_fuse, (spec.arm,) * spec.k, label=f"fuse{spec.k}")


def to_dict(node: ProtocolNode) -> dict:
    out = {"kind": node.kind, "p": node.p}
    if node.bound_mode:
        out["bound_mode"] = True
    if node.children:
        out["children"] = [to_dict(c) for c in node.children]
    if node.label:
        out["label"] = node.label
    return out


def serialize_protocol(node: ProtocolNode, indent: int | None = None) -> str:
    return json.dumps(to_dict(node), indent=indent)


def from_dict(obj, path: str = "") -> ProtocolNode:
    """Validate a decoded JSON object and build the tree."""
    where = path or "/"
    if not isinstance(obj, dict):
        raise ProtocolParseError("expected an object", where)
    unknown = set(obj) - _FIELDS
    if unknown:
        raise ProtocolParseError(f"unknown field(s) {sorted(unknown)}", where)
    kind = obj.get("kind")
    if kind not in (GENERATE, RUS):
        raise ProtocolParseError(f"kind must be 'generate' or 'rus', got {kind!r}", where)
    p = obj.get("p")
    if isinstance(p, bool) or not isinstance(p, (int, float)):
        raise ProtocolParseError("p must be a number", where)
    if not (0.0 < p <= 1.0):
        raise ProtocolParseError(f"p={p!r} must lie in (0, 1]", where)
    bound_mode = obj.get("bound_mode", False)
    if not isinstance(bound_mode, bool):
        raise ProtocolParseError("bound_mode must be a boolean", where)
    label = obj.get("label", "")
    if not isinstance(label, str):
        raise ProtocolParseError("label must be a string", where)
    if kind == GENERATE:
        if "children" in obj:
            raise ProtocolParseError("a generate node cannot have children", where)
        return ProtocolNode(GENERATE, p, bound_mode, (), label)
    children = obj.get("children")
    if not isinstance(children, list) or not children:
        raise ProtocolParseError("a rus node needs a non-empty children array", where)
    kids = tuple(from_dict(c, f"{path}/children/{i}") for i, c in enumerate(children))
    return ProtocolNode(RUS, p, bound_mode, kids, label)


def parse_protocol(text: str) -> ProtocolNode:
    """Parse a JSON protocol document; raises ``ProtocolParseError``."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolParseError(exc.msg, f"{exc.lineno}:{exc.colno}") from None
    return from_dict(obj)


def load_protocol(path) -> ProtocolNode:
    return parse_protocol(Path(path).read_text(encoding="utf-8"))
