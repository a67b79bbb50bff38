"""Drive the HTTP service end to end: upload, solve, poll, fetch.

Starts the API in-process on a spare port, uploads the sensors fixture,
submits a job, polls its progress, and prints the grouped report the
web UI would render.
"""

import json
import tempfile
import threading
import time
import urllib.request
from pathlib import Path

import uvicorn

from ctrlgame.service import create_app

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "ravenclaw_sensors.csv"
PORT = 8642
BASE = f"http://127.0.0.1:{PORT}"


def call(path, data=None, content_type="application/json"):
    request = urllib.request.Request(
        BASE + path,
        data=data,
        headers={"content-type": content_type} if data else {},
    )
    with urllib.request.urlopen(request) as resp:
        return json.loads(resp.read())


with tempfile.TemporaryDirectory() as workdir:
    server = uvicorn.Server(
        uvicorn.Config(
            create_app(workdir), host="127.0.0.1", port=PORT, log_level="warning"
        )
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.05)

    spec = call("/api/specs", FIXTURE.read_bytes(), "text/csv")
    print(f"uploaded spec {spec['spec_id'][:16]}…: "
          f"{spec['controls']} controls, {spec['case_count']} cases")

    job = call(
        "/api/jobs",
        json.dumps(
            {
                "spec_id": spec["spec_id"],
                "budget": "950000",
                "profile": {
                    "tiers": [
                        [
                            {"asset": "Sensors", "objective": "C"},
                            {"asset": "Sensors", "objective": "I"},
                        ],
                        [{"asset": "Sensors", "objective": "A"}],
                    ]
                },
            }
        ).encode(),
    )
    print(f"job {job['job_id'][:8]}… queued")

    while job["state"] not in ("done", "failed"):
        time.sleep(0.05)
        job = call(f"/api/jobs/{job['job_id']}")
        print(f"  state={job['state']} progress={job['progress']['completed']}/{job['progress']['total']}")

    report = call(f"/api/jobs/{job['job_id']}/report")
    for group in report["groups"]:
        print()
        print(f"cases {group['cases']}: cost {group['cost']}")
        for combo in group["combos"]:
            print(f"  combo ({len(combo)} controls): {', '.join(combo[:8])}…")
        for score in group["tier_scores"]:
            print(f"  tier score {score['approx']} (exact {score['exact']})")

    server.should_exit = True
    thread.join(timeout=5)
