"""Successive accumulation of per-object eigenspaces and known/unknown decisions.

Each enrolled object keeps its own independently built eigenspace; enrolling a
new object never touches existing spaces. Mutation (accumulate / enroll) is
serialized behind an internal lock; reads work on immutable snapshots, so
classification may run concurrently between mutations.
"""

import os
import threading
from dataclasses import dataclass

from .eigenspace import (
    Eigenspace,
    EigenspaceConfig,
    build_eigenspace,
    load_model,
    save_model,
)
from .errors import (
    CorruptField,
    DimensionMismatch,
    DuplicateObject,
    EmptyRegistryNoViews,
    InsufficientData,
)
from .imgio import AppearanceVector
from . import recog

MANIFEST_NAME = "registry.manifest"
MANIFEST_MAGIC = "EIGENGAZE-REGISTRY"
MANIFEST_VERSION = 1

AUTO = "auto"


@dataclass(frozen=True)
class EnrollmentPolicy:
    unknown_threshold: float | str = AUTO  # positive real, or "auto"
    auto_margin: float = 1.5

    def __post_init__(self):
        if self.unknown_threshold != AUTO and not self.unknown_threshold > 0:
            raise ValueError("explicit unknown_threshold must be positive")
        if self.auto_margin < 1.0:
            raise ValueError("auto_margin must be >= 1")


@dataclass(frozen=True)
class Decision:
    known: bool
    result: recog.RecognitionResult | None
    threshold: float
    enrolled_id: str | None = None


class ObjectRegistry:
    """Ordered collection of per-object eigenspaces (insertion = acquisition)."""

    def __init__(self, policy: EnrollmentPolicy | None = None):
        self._spaces: tuple[Eigenspace, ...] = ()
        self.policy = policy if policy is not None else EnrollmentPolicy()
        self._lock = threading.RLock()

    @property
    def spaces(self) -> tuple[Eigenspace, ...]:
        return self._spaces

    def find(self, object_id: str) -> Eigenspace | None:
        for es in self._spaces:
            if es.object_id == object_id:
                return es
        return None

    def _append(self, es: Eigenspace):
        if self.find(es.object_id) is not None:
            raise DuplicateObject(f"object {es.object_id!r} already enrolled")
        if self._spaces:
            first = self._spaces[0]
            if es.dim != first.dim or es.config.norm_mode != first.config.norm_mode:
                raise DimensionMismatch(
                    "all enrolled spaces must share dim and norm_mode"
                )
        self._spaces = self._spaces + (es,)

    def accumulate(self, object_id: str, appearances, config: EigenspaceConfig) -> Eigenspace:
        """Build and enroll one object's eigenspace; existing spaces untouched."""
        with self._lock:
            if self.find(object_id) is not None:
                raise DuplicateObject(f"object {object_id!r} already enrolled")
            es = build_eigenspace(object_id, appearances, config)
            self._append(es)
            return es

    def effective_threshold(self) -> float:
        """Known/unknown score cutoff: the explicit policy value, or the largest
        intra-space leave-self-out nearest-neighbor spread times the margin."""
        if self.policy.unknown_threshold != AUTO:
            return float(self.policy.unknown_threshold)
        worst = None
        for es in self._spaces:
            pts = [p.coords for p in es.manifold]
            if len(pts) < 2:
                continue
            for i, a in enumerate(pts):
                nearest = min(
                    float(((a - b) ** 2).sum()) ** 0.5
                    for j, b in enumerate(pts)
                    if j != i
                )
                if worst is None or nearest > worst:
                    worst = nearest
        if worst is None:
            raise InsufficientData(
                "auto threshold needs at least one space with 2+ manifold points"
            )
        return self.policy.auto_margin * worst

    def next_auto_name(self) -> str:
        return f"object-{len(self._spaces) + 1}"

    def classify_or_enroll(
        self,
        v: AppearanceVector,
        pending_views=None,
        config: EigenspaceConfig | None = None,
    ) -> Decision:
        """Recognize v if close enough to an enrolled object; otherwise report
        unknown and, when pending_views are supplied, enroll them as a new
        auto-named object."""
        with self._lock:
            if not self._spaces:
                if pending_views is None:
                    raise EmptyRegistryNoViews(
                        "empty registry and no pending views to enroll"
                    )
                name = self.next_auto_name()
                cfg = config if config is not None else EigenspaceConfig()
                self.accumulate(name, pending_views, cfg)
                return Decision(False, None, float("inf"), enrolled_id=name)

            threshold = self.effective_threshold()
            result = recog.recognize(self, v)
            if result.combined_score <= threshold:
                return Decision(True, result, threshold)
            enrolled = None
            if pending_views is not None:
                enrolled = self.next_auto_name()
                cfg = config if config is not None else self._spaces[0].config
                self.accumulate(enrolled, pending_views, cfg)
            return Decision(False, result, threshold, enrolled_id=enrolled)

    # --- directory persistence ---

    def save_dir(self, path: str):
        os.makedirs(path, exist_ok=True)
        with self._lock:
            for es in self._spaces:
                with open(os.path.join(path, f"{es.object_id}.eig"), "wb") as f:
                    f.write(save_model(es))
            thr = self.policy.unknown_threshold
            thr_text = AUTO if thr == AUTO else format(float(thr), ".17g")
            manifest = [
                f"{MANIFEST_MAGIC} {MANIFEST_VERSION}",
                f"policy {thr_text} {format(self.policy.auto_margin, '.17g')}",
            ]
            manifest += [f"object {es.object_id}" for es in self._spaces]
            manifest.append("END")
            with open(os.path.join(path, MANIFEST_NAME), "w", newline="\n") as f:
                f.write("\n".join(manifest) + "\n")

    @classmethod
    def load_dir(cls, path: str) -> "ObjectRegistry":
        manifest_path = os.path.join(path, MANIFEST_NAME)
        with open(manifest_path, "r") as f:
            lines = f.read().split("\n")
        if not lines or lines[0] != f"{MANIFEST_MAGIC} {MANIFEST_VERSION}":
            raise CorruptField(f"bad manifest header in {manifest_path}")
        if len(lines) < 2 or not lines[1].startswith("policy "):
            raise CorruptField("manifest missing policy line")
        fields = lines[1].split()
        if len(fields) != 3:
            raise CorruptField(f"bad policy line {lines[1]!r}")
        thr = AUTO if fields[1] == AUTO else float(fields[1])
        reg = cls(EnrollmentPolicy(thr, float(fields[2])))
        for line in lines[2:]:
            if line == "END":
                break
            if not line.startswith("object "):
                raise CorruptField(f"bad manifest line {line!r}")
            object_id = line[len("object ") :]
            with open(os.path.join(path, f"{object_id}.eig"), "rb") as f:
                reg._append(load_model(f.read()))
        else:
            raise CorruptField("manifest missing END")
        return reg
