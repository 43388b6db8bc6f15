"""Shared HTTP plumbing for the remote embed and rerank clients."""

from __future__ import annotations

import os
import time

import requests

from .errors import ConfigError, ProviderUnavailableError


def auth_headers(api_key_env: str | None) -> dict[str, str]:
    """Bearer-token header from the environment variable named in config."""
    if api_key_env is None:
        return {}
    key = os.environ.get(api_key_env)
    if key is None:
        raise ConfigError(f"credential environment variable {api_key_env!r} is not set")
    return {"Authorization": f"Bearer {key}"}


def post_json(
    session: requests.Session,
    url: str,
    body: dict,
    *,
    timeout: float,
    retries: int,
    headers: dict[str, str],
    backoff: float = 0.1,
) -> dict:
    """POST with exponential-backoff retries on timeouts, connection errors,
    and 5xx responses. 4xx responses fail immediately."""
    last: Exception | None = None
    for attempt in range(retries + 1):
        try:
            resp = session.post(url, json=body, timeout=timeout, headers=headers)
        except (requests.Timeout, requests.ConnectionError) as exc:
            last = exc
        else:
            if resp.status_code < 400:
                try:
                    return resp.json()
                except ValueError as exc:
                    raise ProviderUnavailableError(f"non-JSON response from {url}") from exc
            if resp.status_code < 500:
                raise ProviderUnavailableError(f"{url} answered {resp.status_code}")
            last = ProviderUnavailableError(f"{url} answered {resp.status_code}")
        if attempt < retries:
            time.sleep(backoff * (2**attempt))
    raise ProviderUnavailableError(f"{url} unreachable after {retries + 1} attempts: {last}")
