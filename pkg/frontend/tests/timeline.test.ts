import assert from "node:assert/strict";
import { test } from "node:test";

import { ApiClient } from "../src/api";
import { SceneTimeline, Segment } from "../src/timeline";

function timeline(narration: number | null): SceneTimeline {
  const t = new SceneTimeline(new ApiClient("http://unused", "p"), "scene-1");
  const segments: Segment[] = [
    { shotId: "a", startS: 0, durationS: 3 },
    { shotId: "b", startS: 3, durationS: 4 },
    { shotId: "c", startS: 7, durationS: 3 },
  ];
  t.load(segments, narration);
  return t;
}

test("widening a middle segment under narration shrinks neighbors, total conserved", () => {
  const t = timeline(10);
  t.resize(1, 1.0);
  assert.deepEqual(
    t.segments.map((s) => s.durationS),
    [2.5, 5.0, 2.5],
  );
  assert.equal(t.totalMs(), 10_000);
  assert.deepEqual(
    t.segments.map((s) => s.startS),
    [0, 2.5, 7.5],
  );
});

test("without narration the total stretches", () => {
  const t = timeline(null);
  t.resize(1, 1.0);
  assert.equal(t.totalMs(), 11_000);
});

test("shrinking a segment to zero is rejected and state is unchanged", () => {
  const t = timeline(10);
  assert.throws(() => t.resize(1, -4.0));
  assert.deepEqual(
    t.segments.map((s) => s.durationS),
    [3, 4, 3],
  );
});

test("boundary drags move time between the two adjacent segments", () => {
  const t = timeline(10);
  t.moveBoundary(0, 0.5);
  assert.deepEqual(
    t.segments.map((s) => s.durationS),
    [3.5, 3.5, 3],
  );
  assert.equal(t.totalMs(), 10_000);
});

test("contiguity is restored after every edit", () => {
  const t = timeline(10);
  t.resize(2, 0.4);
  let cursor = 0;
  for (const seg of t.segments) {
    assert.equal(Math.round(seg.startS * 1000), cursor);
    cursor += Math.round(seg.durationS * 1000);
  }
});
