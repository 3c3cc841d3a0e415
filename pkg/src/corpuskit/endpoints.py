"""JSON-over-HTTP endpoint plumbing shared by scorer/generator integrations.

Scoring and generation models are external services. The toolkit ships the
wire protocols plus deterministic in-process mocks; tests never need a
network. All retry behavior lives in post_with_retry so each wire protocol
only validates payload shape.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

from .errors import EndpointError, EndpointProtocolError


class JsonEndpoint(Protocol):
    def post(self, payload: dict) -> dict: ...


@dataclass(frozen=True)
class RetryPolicy:
    max_retries: int = 3
    backoff_base_s: float = 0.5
    backoff_factor: float = 2.0

    def delay(self, attempt: int) -> float:
        return self.backoff_base_s * (self.backoff_factor**attempt)


@dataclass
class RequestTelemetry:
    attempts: int = 0
    retry_count: int = 0
    errors: list[str] = field(default_factory=list)


class HttpJsonEndpoint:
    """POSTs JSON to a fixed URL. Network/HTTP/JSON failures -> EndpointError."""

    def __init__(self, url: str, timeout_s: float = 30.0, session=None):
        self.url = url
        self.timeout_s = timeout_s
        if session is None:
            import requests

            session = requests.Session()
        self._session = session

    def post(self, payload: dict) -> dict:
        try:
            resp = self._session.post(self.url, json=payload, timeout=self.timeout_s)
        except Exception as e:
            raise EndpointError(f"POST {self.url} failed: {e}") from e
        if resp.status_code != 200:
            raise EndpointError(f"POST {self.url} returned HTTP {resp.status_code}")
        try:
            body = resp.json()
        except (ValueError, json.JSONDecodeError) as e:
            raise EndpointError(f"POST {self.url} returned non-JSON body") from e
        if not isinstance(body, dict):
            raise EndpointProtocolError(f"POST {self.url} returned {type(body).__name__}, expected object")
        return body


class MockJsonEndpoint:
    """Deterministic in-process endpoint for tests and demos.

    `handler` maps request payload -> response payload. `fail_first` makes
    the first N calls raise a transient EndpointError, which is how retry
    schedules are scripted.
    """

    def __init__(
        self,
        handler: Callable[[dict], dict],
        fail_first: int = 0,
        failure: Exception | None = None,
    ):
        self.handler = handler
        self.fail_first = fail_first
        self.failure = failure or EndpointError("scripted transient failure")
        self.calls: list[dict] = []

    def post(self, payload: dict) -> dict:
        self.calls.append(payload)
        if len(self.calls) <= self.fail_first:
            raise self.failure
        return self.handler(payload)


def post_with_retry(
    endpoint: JsonEndpoint,
    payload: dict,
    policy: RetryPolicy = RetryPolicy(),
    telemetry: RequestTelemetry | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> dict:
    """Call the endpoint, retrying transient failures with exponential backoff.

    Protocol violations (EndpointProtocolError) are not retried: a server
    that answers wrongly will answer wrongly again.
    """
    last: Exception | None = None
    for attempt in range(policy.max_retries + 1):
        if telemetry is not None:
            telemetry.attempts += 1
            if attempt > 0:
                telemetry.retry_count += 1
        try:
            return endpoint.post(payload)
        except EndpointProtocolError:
            raise
        except EndpointError as e:
            last = e
            if telemetry is not None:
                telemetry.errors.append(str(e))
            if attempt < policy.max_retries:
                sleep(policy.delay(attempt))
    raise EndpointError(
        f"endpoint failed after {policy.max_retries + 1} attempts: {last}"
    ) from last
