"""Completion-endpoint client and two-stage generation protocol.

The wire protocol is POST {base_url}/v1/completions with a JSON body
{model, prompt, n, max_tokens, temperature, top_p, stop} answering
{"choices": [{"text": ...}, ...]}. Bearer auth comes from an
environment variable so tokens never live in config files.

Two-stage flow: sample sketches, vote on the modal normalized sketch,
then either return it directly (complete sketch: nothing left to fill),
prompt the generator with sketch + context, or fall back to the context
alone when the voted sketch is empty.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import requests

from .errors import (
    AuthFailure,
    EndpointTimeout,
    LexError,
    MalformedResponse,
    RateLimited,
    ServerError,
)
from .evalkit import (
    DEFAULT_STOPS,
    STAGE_BASELINE,
    STAGE_SKETCH_SHORTCUT,
    STAGE_TWO_STAGE,
    CandidateSet,
    Problem,
    Sample,
    save_candidates,
    truncate_completion,
)
from .sketch import (
    DEFAULT_SYMBOLS,
    SketchMode,
    SymbolTable,
    detect_anonymous_symbols,
    normalize,
)

DEFAULT_TEMPERATURES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
DEFAULT_TOP_P = 0.95


@dataclass
class Endpoint:
    base_url: str
    model: str
    auth_token_env: str = "SKETCHKIT_API_TOKEN"
    timeout_s: float = 60.0
    max_retries: int = 3
    backoff_base_s: float = 0.5

    def headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.auth_token_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers


@dataclass
class CompletionRequest:
    prompt: str
    n: int = 1
    max_tokens: int = 300
    temperature: float = 0.2
    top_p: float = DEFAULT_TOP_P
    stop: tuple[str, ...] = DEFAULT_STOPS


def _post_once(endpoint: Endpoint, body: dict) -> list[str]:
    try:
        resp = requests.post(
            endpoint.base_url.rstrip("/") + "/v1/completions",
            json=body,
            headers=endpoint.headers(),
            timeout=endpoint.timeout_s,
        )
    except requests.Timeout as exc:
        raise EndpointTimeout(str(exc)) from exc
    except requests.ConnectionError as exc:
        raise ServerError(f"connection failed: {exc}") from exc
    if resp.status_code in (401, 403):
        raise AuthFailure(f"endpoint answered {resp.status_code}")
    if resp.status_code == 429:
        raise RateLimited("endpoint answered 429")
    if resp.status_code >= 500:
        raise ServerError(f"endpoint answered {resp.status_code}")
    if resp.status_code != 200:
        raise MalformedResponse(
            f"unexpected status {resp.status_code}: {resp.text[:200]}"
        )
    try:
        payload = resp.json()
        choices = payload["choices"]
        return [str(ch["text"]) for ch in choices]
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedResponse(f"bad response body: {exc}") from exc


def complete(
    endpoint: Endpoint,
    request: CompletionRequest,
    sleep=time.sleep,
) -> list[str]:
    """Sample exactly request.n completions, already truncated at the
    stop sequences client-side (belt and braces: well-behaved servers
    stop on their own).

    Transient failures (timeout, 429, 5xx) retry with exponential
    backoff up to endpoint.max_retries; auth failures and malformed
    responses surface immediately.
    """
    texts: list[str] = []
    rounds = 0
    while len(texts) < request.n:
        need = request.n - len(texts)
        body = {
            "model": endpoint.model,
            "prompt": request.prompt,
            "n": need,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
            "top_p": request.top_p,
            "stop": list(request.stop),
        }
        attempt = 0
        while True:
            try:
                batch = _post_once(endpoint, body)
                break
            except (EndpointTimeout, RateLimited, ServerError):
                attempt += 1
                if attempt > endpoint.max_retries:
                    raise
                sleep(endpoint.backoff_base_s * (2 ** (attempt - 1)))
        if not batch:
            raise MalformedResponse("endpoint returned zero choices")
        texts.extend(batch[:need])
        rounds += 1
        if rounds > 50:
            raise MalformedResponse("endpoint keeps under-filling n")
    return [truncate_completion(t, request.stop) for t in texts]


@dataclass
class TwoStageConfig:
    mode: SketchMode = SketchMode.CONSTANTS_ONLY
    symbols: SymbolTable = field(default_factory=lambda: DEFAULT_SYMBOLS)
    n_sketch: int = 200
    n_final: int = 1
    max_tokens: int = 300
    stop: tuple[str, ...] = DEFAULT_STOPS
    seed: int = 0


def _vote_key(text: str) -> str:
    """Normalization for sketch voting; unlexable candidates fall back
    to stripped raw text so they still form equivalence classes."""
    try:
        return normalize(text)
    except LexError:
        return text.strip()


def generate_baseline(
    endpoint: Endpoint,
    problem: Problem,
    n: int,
    temperature: float,
    max_tokens: int = 300,
    stop: tuple[str, ...] = DEFAULT_STOPS,
    seed: int = 0,
    sleep=time.sleep,
) -> CandidateSet:
    """Single-stage sampling: the model sees the context alone."""
    texts = complete(
        endpoint,
        CompletionRequest(
            prompt=problem.context,
            n=n,
            max_tokens=max_tokens,
            temperature=temperature,
            stop=stop,
        ),
        sleep=sleep,
    )
    return CandidateSet(
        task_id=problem.task_id,
        samples=[
            Sample(problem.task_id, t, temperature, seed, STAGE_BASELINE)
            for t in texts
        ],
    )


def generate_two_stage(
    sketcher: Endpoint,
    generator: Endpoint,
    problem: Problem,
    config: TwoStageConfig,
    temperature: float,
    sleep=time.sleep,
) -> CandidateSet:
    """Sketch, vote, then generate.

    1. Sample config.n_sketch sketches from the sketcher on the context.
    2. Vote: modal normalized sketch, ties to the lexicographically
       smallest key; the winning class's earliest raw candidate is the
       working sketch.
    3. Empty voted sketch: the generator sees the context alone.
    4. Complete voted sketch (lexes, no placeholder words): returned as
       the single final candidate without calling the generator.
    5. Otherwise the generator is prompted with sketch + "\\n" + context.
    """
    sketch_texts = complete(
        sketcher,
        CompletionRequest(
            prompt=problem.context,
            n=config.n_sketch,
            max_tokens=config.max_tokens,
            temperature=temperature,
            stop=config.stop,
        ),
        sleep=sleep,
    )
    keys = [_vote_key(t) for t in sketch_texts]
    tally: dict[str, int] = {}
    for key in keys:
        tally[key] = tally.get(key, 0) + 1
    top = max(tally.values())
    winner = min(k for k, v in tally.items() if v == top)
    raw_sketch = sketch_texts[keys.index(winner)]

    if winner == "":
        prompt = problem.context
    else:
        complete_sketch = False
        try:
            complete_sketch = (
                detect_anonymous_symbols(raw_sketch, config.symbols, config.mode)
                == 0
            )
        except LexError:
            complete_sketch = False  # unlexable: let the generator repair it
        if complete_sketch:
            return CandidateSet(
                task_id=problem.task_id,
                samples=[
                    Sample(
                        problem.task_id,
                        raw_sketch,
                        temperature,
                        config.seed,
                        STAGE_SKETCH_SHORTCUT,
                    )
                ],
            )
        prompt = raw_sketch + "\n" + problem.context

    final_texts = complete(
        generator,
        CompletionRequest(
            prompt=prompt,
            n=config.n_final,
            max_tokens=config.max_tokens,
            temperature=temperature,
            stop=config.stop,
        ),
        sleep=sleep,
    )
    return CandidateSet(
        task_id=problem.task_id,
        samples=[
            Sample(problem.task_id, t, temperature, config.seed, STAGE_TWO_STAGE)
            for t in final_texts
        ],
    )


def _safe_task_id(task_id: str) -> str:
    return "".join(c if c.isalnum() or c in "-._" else "_" for c in task_id)


@dataclass
class SweepConfig:
    out_dir: str
    temperatures: tuple[float, ...] = DEFAULT_TEMPERATURES
    n: int = 200
    max_tokens: int = 300
    stop: tuple[str, ...] = DEFAULT_STOPS
    seed: int = 0
    two_stage: TwoStageConfig | None = None  # None: baseline sweep


def sweep(
    endpoint: Endpoint,
    problems: dict[str, Problem],
    config: SweepConfig,
    generator: Endpoint | None = None,
    sleep=time.sleep,
    log=print,
) -> list[str]:
    """Sample every problem at every temperature, persisting one
    candidate JSONL per (problem, temperature).

    Existing files are skipped, so an interrupted sweep resumes by
    rerunning; a persisted candidate set is never rewritten.
    """
    os.makedirs(config.out_dir, exist_ok=True)
    written: list[str] = []
    for temperature in config.temperatures:
        for task_id in sorted(problems):
            fname = f"{_safe_task_id(task_id)}__t{temperature:g}.jsonl"
            path = os.path.join(config.out_dir, fname)
            if os.path.exists(path):
                continue
            try:
                if config.two_stage is not None:
                    if generator is None:
                        raise ValueError("two-stage sweep needs a generator endpoint")
                    ts = config.two_stage
                    cset = generate_two_stage(
                        endpoint, generator, problems[task_id], ts, temperature,
                        sleep=sleep,
                    )
                else:
                    cset = generate_baseline(
                        endpoint,
                        problems[task_id],
                        config.n,
                        temperature,
                        max_tokens=config.max_tokens,
                        stop=config.stop,
                        seed=config.seed,
                        sleep=sleep,
                    )
            except Exception as exc:  # keep sweeping; the file stays absent
                log(f"sweep: {task_id} @ T={temperature:g} failed: {exc}")
                continue
            tmp = path + ".tmp"
            save_candidates(cset.samples, tmp)
            os.replace(tmp, path)
            written.append(path)
    return written
