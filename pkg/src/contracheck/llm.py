"""Language-model gateway.

Prompt templates with ordered few-shot blocks, a provider abstraction, an
append-only run log, and two deterministic offline providers: a scripted
provider that replays transcripts and an oracle provider that answers from
known ground truth. A full detector run under offline providers performs no
I/O and is bit-reproducible.
"""

from __future__ import annotations

import difflib
import hashlib
import json
import os
import re
import time
import warnings
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

from .errors import (
    EmptyResponseError,
    ProviderError,
    TagParseError,
    TemplateError,
    TransportError,
    UnmatchedPromptError,
)

INPUT_MARKER = "# input"
OUTPUT_MARKER = "# output"

_PLACEHOLDER_RE = re.compile(r"\{([a-z_][a-z0-9_]*)\}")


@dataclass(frozen=True)
class PromptTemplate:
    """A named prompt: instruction, few-shot pairs, and a placeholder slot.

    salient_variables names the variables that identify a call semantically
    (used for transcript keying); None means all placeholders are salient.
    """

    name: str
    instruction: str
    input_slot: str
    few_shot: tuple[tuple[str, str], ...] = ()
    salient_variables: tuple[str, ...] | None = None
    notes: str = ""

    def placeholders(self) -> tuple[str, ...]:
        seen: list[str] = []
        for match in _PLACEHOLDER_RE.finditer(self.input_slot):
            if match.group(1) not in seen:
                seen.append(match.group(1))
        return tuple(seen)


def render_prompt(template: PromptTemplate, variables: Mapping[str, str]) -> str:
    """Deterministically render a template: instruction, few-shot pairs in
    declaration order, then the filled input slot."""
    needed = template.placeholders()
    missing = [name for name in needed if name not in variables]
    if missing:
        raise TemplateError(
            f"template {template.name!r} missing variable(s): {', '.join(missing)}"
        )
    unused = sorted(set(variables) - set(needed))
    if unused:
        warnings.warn(
            f"template {template.name!r} ignoring unused variable(s): {', '.join(unused)}",
            stacklevel=2,
        )

    def substitute(match: re.Match) -> str:
        return str(variables[match.group(1)])

    filled = _PLACEHOLDER_RE.sub(substitute, template.input_slot)
    parts = [template.instruction.rstrip()]
    for example_in, example_out in template.few_shot:
        parts.append(f"{INPUT_MARKER}\n{example_in.rstrip()}")
        parts.append(f"{OUTPUT_MARKER}\n{example_out.rstrip()}")
    parts.append(f"{INPUT_MARKER}\n{filled.rstrip()}")
    return "\n\n".join(parts)


def extract_tagged(response: str, tag: str) -> str:
    """Trimmed content of the first well-formed <tag>...</tag> region."""
    match = re.search(rf"<{re.escape(tag)}>(.*?)</{re.escape(tag)}>", response, re.DOTALL)
    if match is None:
        raise TagParseError(f"no well-formed <{tag}> region in response", raw_response=response)
    return match.group(1).strip()


@dataclass(frozen=True)
class DecodingConfig:
    """Decoding settings; greedy (temperature 0) by default."""

    temperature: float = 0.0
    max_tokens: int = 2048
    max_attempts: int = 3


@dataclass(frozen=True)
class LlmRequest:
    """One provider call: the rendered prompt plus call metadata.

    `variables` are the render-time template variables; `context` carries
    structured data about the call (e.g. the claim and evidence texts) for
    providers that answer from ground truth rather than from the prompt.
    """

    prompt: str
    decoding: DecodingConfig = DecodingConfig()
    template_name: str | None = None
    variables: Mapping[str, str] | None = None
    context: Mapping[str, Any] | None = None


@dataclass(frozen=True)
class LlmExchange:
    template_name: str | None
    rendered_prompt: str
    response_text: str
    provider_id: str
    latency_ms: int

    def to_record(self) -> dict:
        return {
            "template_name": self.template_name,
            "rendered_prompt": self.rendered_prompt,
            "response_text": self.response_text,
            "provider_id": self.provider_id,
            "latency_ms": self.latency_ms,
        }


class RunLog:
    """Append-only record of every provider exchange in a run."""

    def __init__(self):
        self._entries: list[LlmExchange] = []

    def record(self, exchange: LlmExchange) -> None:
        self._entries.append(exchange)

    @property
    def entries(self) -> tuple[LlmExchange, ...]:
        return tuple(self._entries)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self._entries:
                fh.write(json.dumps(entry.to_record(), ensure_ascii=False, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RunLog":
        log = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    log.record(LlmExchange(**json.loads(line)))
        return log


class LlmProvider(ABC):
    """Uniform completion interface. Implementations must be safe for
    concurrent calls."""

    provider_id: str = "provider"
    # Offline providers pin latency so run logs are bit-reproducible.
    fixed_latency_ms: int | None = None

    @abstractmethod
    def complete(self, request: LlmRequest) -> str:
        ...


def complete(
    provider: LlmProvider,
    prompt: str,
    decoding: DecodingConfig = DecodingConfig(),
    *,
    template_name: str | None = None,
    variables: Mapping[str, str] | None = None,
    context: Mapping[str, Any] | None = None,
    run_log: RunLog | None = None,
) -> str:
    """Call a provider with retries on transport failure, logging the exchange."""
    if not prompt:
        raise ProviderError("prompt must be non-empty")
    request = LlmRequest(
        prompt=prompt,
        decoding=decoding,
        template_name=template_name,
        variables=variables,
        context=context,
    )
    attempts = 0
    start = time.perf_counter()
    while True:
        attempts += 1
        try:
            response = provider.complete(request)
            break
        except TransportError as exc:
            if attempts >= decoding.max_attempts:
                raise TransportError(
                    f"provider {provider.provider_id} failed after {attempts} attempt(s): {exc}",
                    attempts=attempts,
                ) from exc
    if not response or not response.strip():
        raise EmptyResponseError(f"provider {provider.provider_id} returned an empty response")
    if provider.fixed_latency_ms is not None:
        latency_ms = provider.fixed_latency_ms
    else:
        latency_ms = int((time.perf_counter() - start) * 1000)
    if run_log is not None:
        run_log.record(
            LlmExchange(
                template_name=template_name,
                rendered_prompt=prompt,
                response_text=response,
                provider_id=provider.provider_id,
                latency_ms=latency_ms,
            )
        )
    return response


def call_template(
    provider: LlmProvider,
    template: PromptTemplate,
    variables: Mapping[str, str],
    *,
    decoding: DecodingConfig = DecodingConfig(),
    context: Mapping[str, Any] | None = None,
    run_log: RunLog | None = None,
) -> str:
    """Render a template and complete it, threading call metadata through."""
    prompt = render_prompt(template, variables)
    return complete(
        provider,
        prompt,
        decoding,
        template_name=template.name,
        variables=variables,
        context=context,
        run_log=run_log,
    )


def normalize_ws(text: str) -> str:
    """Collapse all whitespace runs; equality modulo whitespace uses this."""
    return " ".join(text.split())


def _digest(payload: str) -> str:
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:24]


def keyed_transcript_key(
    template_name: str,
    variables: Mapping[str, str],
    salient: Iterable[str] | None = None,
) -> str:
    """Transcript key from a template name and its salient variables, so
    cosmetic template edits do not invalidate fixtures."""
    names = sorted(salient) if salient is not None else sorted(variables)
    payload = json.dumps({n: variables.get(n, "") for n in names}, sort_keys=True, ensure_ascii=False)
    return f"keyed:{template_name}:{_digest(payload)}"


def exact_transcript_key(prompt: str) -> str:
    return f"exact:{_digest(prompt)}"


class ScriptedProvider(LlmProvider):
    """Deterministic provider replaying canned responses; never performs I/O.

    Lookup order: exact prompt match (strict regression mode), then
    (template, salient-variable digest), then a per-template FIFO queue, then
    a per-template default. Anything else raises naming the nearest key.
    """

    provider_id = "scripted"
    fixed_latency_ms = 0

    def __init__(self):
        self._exact: dict[str, str] = {}
        self._keyed: dict[str, str] = {}
        # salient-name tuples seen at registration, tried again at lookup
        self._keyed_saliences: dict[str, set[tuple[str, ...]]] = {}
        self._keyed_names: dict[str, tuple[str, ...]] = {}
        self._queues: dict[str, deque[str]] = {}
        self._defaults: dict[str, str] = {}

    def add_exact(self, prompt: str, response: str) -> "ScriptedProvider":
        self._exact[exact_transcript_key(prompt)] = response
        return self

    def add_keyed(
        self,
        template_name: str,
        variables: Mapping[str, str],
        response: str,
        salient: Iterable[str] | None = None,
    ) -> "ScriptedProvider":
        names = tuple(sorted(salient)) if salient is not None else tuple(sorted(variables))
        key = keyed_transcript_key(template_name, variables, names)
        self._keyed[key] = response
        self._keyed_names[key] = names
        self._keyed_saliences.setdefault(template_name, set()).add(names)
        return self

    def push(self, template_name: str, *responses: str) -> "ScriptedProvider":
        self._queues.setdefault(template_name, deque()).extend(responses)
        return self

    def set_default(self, template_name: str, response: str) -> "ScriptedProvider":
        self._defaults[template_name] = response
        return self

    def complete(self, request: LlmRequest) -> str:
        exact = exact_transcript_key(request.prompt)
        if exact in self._exact:
            return self._exact[exact]
        name = request.template_name
        if name is not None and request.variables is not None:
            candidates = set(self._keyed_saliences.get(name, ()))
            declared = _salient_for(name, request.variables)
            candidates.add(
                tuple(sorted(declared)) if declared is not None else tuple(sorted(request.variables))
            )
            for names in sorted(candidates):
                keyed = keyed_transcript_key(name, request.variables, names)
                if keyed in self._keyed:
                    return self._keyed[keyed]
        if name is not None and self._queues.get(name):
            return self._queues[name].popleft()
        if name is not None and name in self._defaults:
            return self._defaults[name]
        known = list(self._exact) + list(self._keyed) + [
            f"queue:{n}" for n in self._queues if self._queues[n]
        ] + [f"default:{n}" for n in self._defaults]
        probe = f"keyed:{name}:" if name else exact
        nearest = difflib.get_close_matches(probe, known, n=1, cutoff=0.0)
        raise UnmatchedPromptError(
            f"no transcript entry for template={name!r}; nearest key: "
            f"{nearest[0] if nearest else '<none>'}",
            nearest_key=nearest[0] if nearest else None,
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for key, response in self._exact.items():
                fh.write(json.dumps({"key": key, "response": response}, ensure_ascii=False) + "\n")
            for key, response in self._keyed.items():
                record = {"key": key, "response": response}
                if key in self._keyed_names:
                    record["salient"] = list(self._keyed_names[key])
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            for name, queue in self._queues.items():
                for i, response in enumerate(queue):
                    fh.write(
                        json.dumps({"key": f"queue:{name}:{i}", "response": response}, ensure_ascii=False)
                        + "\n"
                    )
            for name, response in self._defaults.items():
                fh.write(
                    json.dumps({"key": f"default:{name}", "response": response}, ensure_ascii=False)
                    + "\n"
                )

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedProvider":
        provider = cls()
        queued: list[tuple[str, int, str]] = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                key, response = record["key"], record["response"]
                if key.startswith(("exact:",)):
                    provider._exact[key] = response
                elif key.startswith("keyed:"):
                    provider._keyed[key] = response
                    template_name = key.split(":", 2)[1]
                    if record.get("salient") is not None:
                        names = tuple(record["salient"])
                        provider._keyed_names[key] = names
                        provider._keyed_saliences.setdefault(template_name, set()).add(names)
                elif key.startswith("queue:"):
                    _, name, index = key.split(":", 2)
                    queued.append((name, int(index), response))
                elif key.startswith("default:"):
                    provider._defaults[key.split(":", 1)[1]] = response
                else:
                    raise ProviderError(f"unknown transcript key format: {key!r}")
        for name, _, response in sorted(queued, key=lambda item: (item[0], item[1])):
            provider.push(name, response)
        return provider

    @classmethod
    def from_run_log(cls, run_log: RunLog) -> "ScriptedProvider":
        """Replay provider: exact-prompt entries from a recorded run."""
        provider = cls()
        for entry in run_log.entries:
            provider.add_exact(entry.rendered_prompt, entry.response_text)
        return provider


def _salient_for(template_name: str, variables: Mapping[str, str]) -> tuple[str, ...] | None:
    from . import templates  # local import to avoid a cycle at module load

    template = templates.TEMPLATES.get(template_name)
    if template is None:
        return None
    return template.salient_variables


class OracleNliProvider(LlmProvider):
    """Ground-truth provider for synthetic benchmarks.

    Holds a map from each claim to the exact corpus texts known to refute it
    (whitespace-normalized). A passage SUPPORTS a claim iff it equals the
    claim, REFUTES iff it is a registered refutation, else NOT_ENOUGH_INFO;
    verification scores 1.0 iff any presented document refutes the claim.
    """

    provider_id = "oracle"
    fixed_latency_ms = 0

    def __init__(self, refutations: Mapping[str, Iterable[str]]):
        self._refutations = {
            normalize_ws(claim): {normalize_ws(t) for t in texts}
            for claim, texts in refutations.items()
        }

    def _refutes(self, claim: str, passage: str) -> bool:
        return normalize_ws(passage) in self._refutations.get(normalize_ws(claim), set())

    def complete(self, request: LlmRequest) -> str:
        context = request.context or {}
        name = request.template_name
        if name == "nli_classify":
            claim = context.get("claim_text", "")
            passage = context.get("passage_text", "")
            if normalize_ws(passage) == normalize_ws(claim):
                label = "SUPPORTS"
            elif self._refutes(claim, passage):
                label = "REFUTES"
            else:
                label = "NOT_ENOUGH_INFO"
            return f"<label>{label}</label>"
        if name == "verifier":
            claim = context.get("claim_text", "")
            evidence = context.get("evidence_texts", [])
            score = 1.0 if any(self._refutes(claim, text) for text in evidence) else 0.0
            return f"<inconsistency_score>{score}</inconsistency_score>"
        if name == "weak_filter":
            claim = context.get("claim_text", "")
            evidence = context.get("evidence_texts", [])
            decision = "yes" if any(self._refutes(claim, text) for text in evidence) else "no"
            return f"<decision>{decision}</decision>"
        raise ProviderError(f"oracle provider cannot answer template {name!r}")


class HttpChatProvider(LlmProvider):
    """Client for an OpenAI-style chat-completions endpoint.

    Credentials come from an environment variable only; they are never read
    from config files and never logged.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "CONTRACHECK_API_KEY",
        timeout_s: float = 60.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.provider_id = f"http:{model}"

    def complete(self, request: LlmRequest) -> str:
        import httpx

        headers = {}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": self.model,
            "temperature": request.decoding.temperature,
            "max_tokens": request.decoding.max_tokens,
            "messages": [{"role": "user", "content": request.prompt}],
        }
        try:
            response = httpx.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers=headers,
                timeout=self.timeout_s,
            )
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise TransportError(f"chat endpoint failure: {exc}") from exc
        body = response.json()
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"unexpected chat completion payload: {body!r}") from exc
