"""Run-directory persistence and report rendering: delimited trajectory
and action tables plus a rendered convergence figure."""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path

from .backends import TranscriptLog
from .orchestrator import RunReport


def write_run_dir(report: RunReport, out_dir,
                  transcript: TranscriptLog = None) -> Path:
    """Persist one finished run as a directory of JSON documents."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = report.to_dict()

    def dump(name, payload):
        (out / name).write_text(json.dumps(payload, indent=2, sort_keys=True))

    dump("config.json", doc["config"])
    dump("tree.json", doc["tree"])
    dump("knowledge.json", doc["knowledge"])
    dump("best_artifact.json", doc["best_artifact"])
    dump("report.json", doc)
    with (out / "events.jsonl").open("w") as fh:
        for event in doc["events"]:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
    if transcript is not None:
        with (out / "transcript.jsonl").open("w") as fh:
            for record in transcript.records:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    (out / "digest.txt").write_text(report.digest() + "\n")
    return out


def load_report(run_dir) -> RunReport:
    doc = json.loads((Path(run_dir) / "report.json").read_text())
    return RunReport(**doc)


def action_table(report: RunReport) -> list[dict]:
    """Per-action effectiveness: outcome counts and reward statistics."""
    stats = defaultdict(lambda: {"ok": 0, "invalid": 0, "duplicate": 0,
                                 "error": 0, "timeout": 0, "rewards": []})
    for event in report.events:
        action = event["action"]
        if action == "ckv":
            continue
        row = stats[action]
        row[event["status"]] = row.get(event["status"], 0) + 1
        if event["status"] == "ok" and event["reward"] is not None:
            row["rewards"].append(event["reward"])
    table = []
    for action in sorted(stats):
        row = stats[action]
        rewards = row.pop("rewards")
        table.append({
            "action": action,
            **{k: row[k] for k in ("ok", "invalid", "duplicate", "error",
                                   "timeout")},
            "mean_reward": (sum(rewards) / len(rewards)) if rewards else "",
            "best_reward": max(rewards) if rewards else "",
        })
    return table


def knowledge_summary(report: RunReport) -> str:
    lines = []
    for side in ("positive", "negative"):
        records = report.knowledge[side]
        lines.append(f"{side}: {len(records)} record(s)")
        for rec in records:
            first = rec["text"].splitlines()[0][:100]
            lines.append(f"  cycle {rec['cycle_index']} "
                         f"(t={rec['created_at_budget']}): {first}")
    return "\n".join(lines) + "\n"


def _write_csv(path: Path, rows: list[dict], fieldnames: list[str]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


def render_report(report: RunReport, dest_dir) -> Path:
    """Write trajectory.csv, actions.csv, knowledge.txt and trajectory.png."""
    dest = Path(dest_dir)
    dest.mkdir(parents=True, exist_ok=True)

    _write_csv(dest / "trajectory.csv",
               [{"t": p["t"], "best_reward": repr(p["best_reward"])}
                for p in report.trajectory],
               ["t", "best_reward"])
    _write_csv(dest / "actions.csv", action_table(report),
               ["action", "ok", "invalid", "duplicate", "error", "timeout",
                "mean_reward", "best_reward"])
    (dest / "knowledge.txt").write_text(knowledge_summary(report))

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ts = [p["t"] for p in report.trajectory]
    rewards = [p["best_reward"] for p in report.trajectory]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.step(ts, rewards, where="post")
    ax.set_xlabel("evaluation budget consumed")
    ax.set_ylabel("best reward")
    ax.set_title("Search convergence")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(dest / "trajectory.png", dpi=120)
    plt.close(fig)
    return dest
