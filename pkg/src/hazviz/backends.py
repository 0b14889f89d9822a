"""Pluggable text and image backends.

Real deployments point the orchestrator at hosted model APIs; this module
ships deterministic stand-ins so the whole pipeline runs at desk scale with
no credentials. Backends are looked up by id, and a custom backend only has
to honor the two small protocols below; credentials for remote services are
read from the environment (HAZVIZ_API_KEY), never from flags.
"""
from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass
from typing import Callable, Mapping, Protocol, runtime_checkable

from PIL import Image

from .errors import BackendUnavailableError, HazvizError


@dataclass(frozen=True)
class CallContext:
    """Where in a run a backend call sits; mocks key canned output off this."""

    record_id: str
    mode: str
    iteration: int
    stage: str


@dataclass(frozen=True)
class TextResult:
    text: str
    tokens_up: int | None
    tokens_down: int | None


@dataclass(frozen=True)
class ImageResult:
    data: bytes  # PNG bytes
    width: int
    height: int
    tokens_up: int | None
    tokens_down: int | None


class BackendCallError(HazvizError):
    """A single backend call failed; the orchestrator may retry it."""


@runtime_checkable
class TextBackend(Protocol):
    backend_id: str

    def check_ready(self) -> None:
        """Raise BackendUnavailableError if the backend cannot serve calls."""

    def generate_text(
        self,
        prompt: str,
        *,
        temperature: float,
        context: CallContext | None = None,
    ) -> TextResult: ...


@runtime_checkable
class ImageBackend(Protocol):
    backend_id: str

    def check_ready(self) -> None: ...

    def generate_image(
        self,
        prompt: str,
        *,
        conditioning: bytes | None = None,
        temperature: float | None = None,
        context: CallContext | None = None,
    ) -> ImageResult: ...


class EchoTextBackend:
    """Returns the prompt itself; handy for asserting composed prompt text."""

    backend_id = "echo"

    def check_ready(self) -> None:
        return None

    def generate_text(
        self,
        prompt: str,
        *,
        temperature: float,
        context: CallContext | None = None,
    ) -> TextResult:
        return TextResult(text=prompt, tokens_up=len(prompt), tokens_down=len(prompt))


# Fallback stage texts for the scripted backend. The T3 text must carry a
# SAFETY_WARNING line with a 5-7 word phrase or downstream parsing fails.
_FALLBACK_STAGE_TEXT: Mapping[str, str] = {
    "SP": (
        "THE INFRASTRUCTURE: A two-lane paved roadway with fresh lane markings "
        "runs past a coned-off work area ({record_id}). THE ACTIVITY: A paving "
        "crew works beside an idling dump truck inside the taper. THE HAZARD: A "
        "reversing truck closes on a worker standing in its blind spot."
    ),
    "T1": (
        "A two-lane paved roadway bordered by gravel shoulders passes a work "
        "area marked out with traffic cones and portable barriers ({record_id}). "
        "Fresh lane markings guide traffic into a single open lane. The closed "
        "lane is empty and swept clean."
    ),
    "T2": (
        "A dump truck idles inside the coned-off lane near a skid-steer loader "
        "({record_id}). Two workers in high-visibility vests and hard hats rake "
        "fresh asphalt behind the truck. The nearer worker stands a few feet "
        "from the truck's rear wheels."
    ),
    "T3": (
        "The worker raking asphalt directly behind the dump truck should be "
        "highlighted with a red outline or glow ({record_id}).\n"
        "SAFETY_WARNING: Stay clear of reversing trucks"
    ),
    "T4": (
        "The dump truck begins reversing while the nearer worker is still "
        "raking behind it ({record_id}). The truck's rear bumper makes contact "
        "with the worker's back and shoulder. The worker is knocked forward "
        "onto the fresh asphalt."
    ),
}


class ScriptedTextBackend:
    """Deterministic mock: canned text keyed by (record_id, stage).

    Calls with no canned entry fall back to a fixed per-stage text stamped
    with the record id, so runs stay deterministic without fixtures.
    """

    backend_id = "mock"

    def __init__(self, canned: Mapping[tuple[str, str], str] | None = None) -> None:
        self._canned = dict(canned or {})

    def check_ready(self) -> None:
        return None

    def generate_text(
        self,
        prompt: str,
        *,
        temperature: float,
        context: CallContext | None = None,
    ) -> TextResult:
        if context is not None:
            key = (context.record_id, context.stage)
            if key in self._canned:
                text = self._canned[key]
            else:
                text = _FALLBACK_STAGE_TEXT[context.stage].replace(
                    "{record_id}", context.record_id
                )
        else:
            text = prompt
        return TextResult(text=text, tokens_up=len(prompt), tokens_down=len(text))


class DigestImageBackend:
    """Deterministic mock: pixels are a SHA-256 stream over the prompt.

    Conditioning bytes are folded into the digest so temporal stages differ
    from unconditioned ones. Output size is constant per instance; real
    deployments produce 1408x768 frames, the mock defaults to a small frame
    to keep batch runs fast.
    """

    backend_id = "mock"

    def __init__(self, width: int = 176, height: int = 96) -> None:
        self.width = width
        self.height = height

    def check_ready(self) -> None:
        return None

    def generate_image(
        self,
        prompt: str,
        *,
        conditioning: bytes | None = None,
        temperature: float | None = None,
        context: CallContext | None = None,
    ) -> ImageResult:
        seed = hashlib.sha256()
        seed.update(prompt.encode("utf-8"))
        seed.update(b"\x00")
        seed.update(hashlib.sha256(conditioning or b"").digest())
        stream = bytearray()
        block = seed.digest()
        needed = self.width * self.height * 3
        while len(stream) < needed:
            block = hashlib.sha256(block).digest()
            stream.extend(block)
        image = Image.frombytes("RGB", (self.width, self.height), bytes(stream[:needed]))
        buffer = io.BytesIO()
        image.save(buffer, format="PNG")
        return ImageResult(
            data=buffer.getvalue(),
            width=self.width,
            height=self.height,
            tokens_up=len(prompt),
            tokens_down=0,
        )


class FaultInjectingTextBackend:
    """Wraps a text backend and fails calls matching a predicate (testing)."""

    def __init__(
        self,
        inner: TextBackend,
        should_fail: Callable[[CallContext | None], bool],
    ) -> None:
        self._inner = inner
        self._should_fail = should_fail
        self.backend_id = inner.backend_id

    def check_ready(self) -> None:
        self._inner.check_ready()

    def generate_text(
        self,
        prompt: str,
        *,
        temperature: float,
        context: CallContext | None = None,
    ) -> TextResult:
        if self._should_fail(context):
            raise BackendCallError(f"injected text failure at {context}")
        return self._inner.generate_text(prompt, temperature=temperature, context=context)


class FaultInjectingImageBackend:
    """Wraps an image backend and fails calls matching a predicate (testing)."""

    def __init__(
        self,
        inner: ImageBackend,
        should_fail: Callable[[CallContext | None], bool],
    ) -> None:
        self._inner = inner
        self._should_fail = should_fail
        self.backend_id = inner.backend_id

    def check_ready(self) -> None:
        self._inner.check_ready()

    def generate_image(
        self,
        prompt: str,
        *,
        conditioning: bytes | None = None,
        temperature: float | None = None,
        context: CallContext | None = None,
    ) -> ImageResult:
        if self._should_fail(context):
            raise BackendCallError(f"injected image failure at {context}")
        return self._inner.generate_image(
            prompt, conditioning=conditioning, temperature=temperature, context=context
        )


class UnreachableBackend:
    """Fails its readiness check; exercises the fail-fast startup path."""

    backend_id = "unreachable"

    def check_ready(self) -> None:
        raise BackendUnavailableError("backend is unreachable")

    def generate_text(self, prompt: str, *, temperature: float, context=None) -> TextResult:
        raise BackendCallError("backend is unreachable")

    def generate_image(
        self, prompt: str, *, conditioning=None, temperature=None, context=None
    ) -> ImageResult:
        raise BackendCallError("backend is unreachable")


_TEXT_BACKENDS: dict[str, Callable[[], TextBackend]] = {
    "echo": EchoTextBackend,
    "mock": ScriptedTextBackend,
}
_IMAGE_BACKENDS: dict[str, Callable[[], ImageBackend]] = {
    "mock": DigestImageBackend,
}


def get_text_backend(backend_id: str) -> TextBackend:
    try:
        return _TEXT_BACKENDS[backend_id]()
    except KeyError:
        raise BackendUnavailableError(
            f"unknown text backend {backend_id!r}; available: {', '.join(sorted(_TEXT_BACKENDS))}"
        ) from None


def get_image_backend(backend_id: str) -> ImageBackend:
    try:
        return _IMAGE_BACKENDS[backend_id]()
    except KeyError:
        raise BackendUnavailableError(
            f"unknown image backend {backend_id!r}; available: {', '.join(sorted(_IMAGE_BACKENDS))}"
        ) from None
