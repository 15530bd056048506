"""Yes/no prompting against a pluggable chat-completion backend.

Three backends share one interface (``complete(prompt) -> str``):

* ``HttpBackend``: a chat-completions endpoint, temperature 0, with retry
  and exponential backoff on timeouts, 429 and 5xx.
* ``MockBackend``: scripted answers keyed by prompt hash, optional keyword
  rules per criterion, and a default answer. Used for offline runs.
* ``CacheOnlyBackend``: answers only from the response cache.

``query`` always consults the append-only JSONL cache first.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping

import httpx

from .criteria import Criterion
from .errors import AuthenticationError, CacheMiss, ConfigError, TransportError
from .labels import Label
from .text import strip_punct

logger = logging.getLogger(__name__)

API_KEY_ENV = "COHORT_SIEVE_API_KEY"
DELIMITER = " The text is delimited with triple backticks."
FENCE = "```"
CLARIFY = "Answer with exactly one word: yes or no."


class Answer(str, Enum):
    YES = "yes"
    NO = "no"
    UNPARSEABLE = "unparseable"


@dataclass(frozen=True)
class BackendConfig:
    base_url: str = "https://api.openai.com/v1"
    model_name: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    max_retries: int = 4
    timeout_seconds: float = 60.0
    request_concurrency_limit: int = 4
    backoff_seconds: float = 1.0

    def __post_init__(self):
        if self.temperature != 0:
            raise ConfigError("temperature must be 0")
        if self.max_retries < 1:
            raise ConfigError("max_retries must be at least 1")
        if self.timeout_seconds <= 0 or self.request_concurrency_limit < 1:
            raise ConfigError("timeout_seconds and request_concurrency_limit must be positive")


def content_hash(model_name: str, text: str) -> str:
    return hashlib.sha256(f"{model_name}\n{text}".encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Prompt:
    criterion_id: str
    text: str
    model_name: str = ""

    @property
    def content_hash(self) -> str:
        return content_hash(self.model_name, self.text)

    @property
    def body(self) -> str:
        """The fenced text, without the fences."""
        start = self.text.find("text: " + FENCE)
        if start < 0:
            return ""
        start += len("text: " + FENCE)
        end = self.text.rfind(FENCE)
        return self.text[start:end] if end >= start else ""


def compose(criterion: Criterion, rendered_summary: str, model_name: str = "") -> Prompt:
    if not rendered_summary.strip():
        raise ValueError(
            f"{criterion.id}: empty summary; use the no-evidence default instead of prompting"
        )
    body = rendered_summary.replace(FENCE, "'''")
    text = f"{criterion.prompt_question}{DELIMITER}\n\ntext: {FENCE}{body}{FENCE}"
    return Prompt(criterion.id, text, model_name)


def parse_answer(raw: str) -> Answer:
    words = raw.strip().lower().split()
    if not words:
        return Answer.UNPARSEABLE
    s, e = strip_punct(words[0])
    first = words[0][s:e]
    if first == "yes":
        return Answer.YES
    if first == "no":
        return Answer.NO
    return Answer.UNPARSEABLE


def classify(parsed: Answer, criterion: Criterion) -> Label:
    if parsed is Answer.YES:
        return criterion.yes_means
    if parsed is Answer.NO:
        return criterion.yes_means.flip()
    raise ValueError(f"{criterion.id}: cannot classify an unparseable answer")


class ResponseCache:
    """Append-only JSONL store of answers keyed by prompt hash."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, str] = {}
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            for n, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    key = obj["content_hash"]
                    ok = content_hash(obj["model"], obj["prompt"]) == key
                except (json.JSONDecodeError, KeyError, TypeError):
                    logger.warning("%s:%d: unreadable cache line skipped", self.path, n)
                    continue
                if not ok:
                    logger.warning("%s:%d: hash does not match prompt; skipped", self.path, n)
                    continue
                self._entries[key] = obj["answer"]

    def get(self, prompt: Prompt) -> str | None:
        return self._entries.get(prompt.content_hash)

    def put(self, prompt: Prompt, answer: str) -> None:
        obj = {
            "content_hash": prompt.content_hash,
            "model": prompt.model_name,
            "prompt": prompt.text,
            "answer": answer,
            "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
        }
        line = json.dumps(obj, ensure_ascii=False) + "\n"
        with self._lock:
            if prompt.content_hash in self._entries:
                return
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
            self._entries[prompt.content_hash] = answer

    def __len__(self) -> int:
        return len(self._entries)


class HttpBackend:
    source = "live"
    caches = True

    def __init__(
        self,
        config: BackendConfig,
        api_key: str | None = None,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self.model_name = config.model_name
        self._key = api_key or os.environ.get(API_KEY_ENV)
        if not self._key:
            raise ConfigError(f"live backend needs an API key in ${API_KEY_ENV}")
        self._client = client or httpx.Client(timeout=config.timeout_seconds)
        self._sleep = sleep
        self.attempts = 0

    def backoff(self, retry: int) -> float:
        """Delay before retry number ``retry`` (1-based)."""
        return self.config.backoff_seconds * 2 ** (retry - 1)

    def complete(self, prompt: Prompt) -> str:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        body = {
            "model": self.config.model_name,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt.text}],
        }
        headers = {"Authorization": f"Bearer {self._key}"}
        last_status = None
        last_error = ""
        for attempt in range(self.config.max_retries):
            if attempt:
                delay = self.backoff(attempt)
                logger.warning(
                    "retrying %s in %.1fs (attempt %d/%d): %s",
                    prompt.criterion_id, delay, attempt + 1, self.config.max_retries, last_error,
                )
                self._sleep(delay)
            self.attempts += 1
            try:
                resp = self._client.post(
                    url, json=body, headers=headers, timeout=self.config.timeout_seconds
                )
            except httpx.TimeoutException as exc:
                last_status, last_error = None, f"timeout: {exc}"
                continue
            except httpx.TransportError as exc:
                last_status, last_error = None, f"connection error: {exc}"
                continue
            status = resp.status_code
            if status in (401, 403):
                raise AuthenticationError(f"authentication failed ({status})", status)
            if status == 429 or status >= 500:
                last_status, last_error = status, f"HTTP {status}"
                continue
            if status >= 400:
                raise TransportError(f"HTTP {status}: {resp.text[:200]}", status)
            try:
                content = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError):
                raise TransportError("malformed completion response", status) from None
            return content or ""
        raise TransportError(
            f"gave up after {self.config.max_retries} attempts ({last_error})", last_status
        )


class MockBackend:
    """Offline backend.

    Lookup order: exact prompt hash in ``answers``, keyword rule for the
    prompt's criterion (``"Yes."`` when any keyword occurs as a whole word
    in the fenced text, else ``"No."``), then ``default``.
    """

    source = "mock"
    caches = False

    def __init__(
        self,
        answers: Mapping[str, str] | None = None,
        keywords: Mapping[str, Iterable[str]] | None = None,
        default: str = "No.",
        model_name: str = "mock",
    ):
        self.answers = dict(answers or {})
        self.default = default
        self.model_name = model_name
        self._rules = {
            cid: re.compile(r"\b(?:" + "|".join(re.escape(k) for k in kws) + r")\b", re.IGNORECASE)
            for cid, kws in (keywords or {}).items()
            if kws
        }
        self.calls = 0
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path) -> MockBackend:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            answers=obj.get("answers"),
            keywords=obj.get("keywords"),
            default=obj.get("default", "No."),
            model_name=obj.get("model_name", "mock"),
        )

    def complete(self, prompt: Prompt) -> str:
        with self._lock:
            self.calls += 1
        if prompt.content_hash in self.answers:
            return self.answers[prompt.content_hash]
        rule = self._rules.get(prompt.criterion_id)
        if rule is not None:
            return "Yes." if rule.search(prompt.body) else "No."
        return self.default


class CacheOnlyBackend:
    source = "cache"
    caches = False

    def __init__(self, model_name: str):
        self.model_name = model_name

    def complete(self, prompt: Prompt) -> str:
        raise CacheMiss(f"no cached answer for {prompt.criterion_id} prompt {prompt.content_hash[:12]}")


def query(backend, prompt: Prompt, cache: ResponseCache | None = None) -> tuple[str, str]:
    """Return ``(answer, source)``; the cache is consulted before the backend."""
    if cache is not None:
        hit = cache.get(prompt)
        if hit is not None:
            return hit, "cache"
    answer = backend.complete(prompt)
    if cache is not None and backend.caches:
        cache.put(prompt, answer)
    return answer, backend.source


@dataclass(frozen=True)
class AnswerRecord:
    patient_id: str
    criterion_id: str
    prompt_hash: str
    raw_answer: str
    parsed: Answer
    label: Label
    source: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["parsed"] = self.parsed.value
        d["label"] = self.label.value
        return d


def decide(patient_id: str, criterion: Criterion, text: str, backend, cache=None) -> AnswerRecord:
    """Label one (patient, criterion) pair from its rendered evidence text."""
    if not text.strip():
        return AnswerRecord(
            patient_id, criterion.id, "", "", Answer.UNPARSEABLE,
            criterion.no_evidence_default, "no-evidence-default",
        )
    prompt = compose(criterion, text, backend.model_name)
    try:
        raw, source = query(backend, prompt, cache)
        parsed = parse_answer(raw)
        if parsed is Answer.UNPARSEABLE:
            logger.warning("%s/%s: unparseable answer %r; asking again", patient_id, criterion.id, raw)
            prompt = Prompt(prompt.criterion_id, f"{prompt.text}\n\n{CLARIFY}", prompt.model_name)
            raw, source = query(backend, prompt, cache)
            parsed = parse_answer(raw)
    except TransportError as exc:
        raise type(exc)(f"{patient_id}/{criterion.id}: {exc}", exc.status) from exc
    if parsed is Answer.UNPARSEABLE:
        logger.warning(
            "%s/%s: still unparseable (%r); using default %s",
            patient_id, criterion.id, raw, criterion.no_evidence_default.value,
        )
        label = criterion.no_evidence_default
    else:
        label = classify(parsed, criterion)
    return AnswerRecord(patient_id, criterion.id, prompt.content_hash, raw, parsed, label, source)


@dataclass(frozen=True)
class Job:
    patient_id: str
    criterion: Criterion
    text: str = field(repr=False)


def decide_all(jobs: Iterable[Job], backend, cache=None, concurrency: int = 4) -> list[AnswerRecord]:
    """Run ``decide`` over many pairs with bounded parallelism, sorted by (patient, criterion)."""
    jobs = list(jobs)
    if concurrency <= 1:
        results = [decide(j.patient_id, j.criterion, j.text, backend, cache) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            futures = [
                pool.submit(decide, j.patient_id, j.criterion, j.text, backend, cache) for j in jobs
            ]
            try:
                results = [f.result() for f in futures]
            except BaseException:
                for f in futures:
                    f.cancel()
                raise
    return sorted(results, key=lambda r: (r.patient_id, r.criterion_id))
