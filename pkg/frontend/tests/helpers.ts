/** Test scaffolding: fixture projects built through the CLI, plus a live
 * mock-backed service spawned for flow tests. */

import { execFileSync, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { AnnotationOverlay } from "../src/annotations";

const PYTHON = process.env.PYTHON ?? "python3";

export function cli(projectDir: string, ...args: string[]): any {
  const out = execFileSync(PYTHON, ["-m", "storyweave.cli", "-p", projectDir, ...args], {
    encoding: "utf-8",
  });
  return out.trim() ? JSON.parse(out) : {};
}

export function testPng(width: number, height: number, seed: number): Uint8Array {
  const overlay = new AnnotationOverlay("fixture", width, height);
  const stroke = overlay.beginStroke((seed * 13) % width, (seed * 7) % height, [
    (seed * 37) % 256,
    (seed * 59) % 256,
    (seed * 83) % 256,
  ]);
  overlay.extendStroke(stroke, (seed * 29 + 40) % width, (seed * 17 + 25) % height);
  overlay.addLabel((seed * 11) % Math.max(1, width - 60), (seed * 19) % Math.max(1, height - 12), `s${seed}`);
  return overlay.flatten().rasterPng;
}

export interface Fixture {
  dir: string;
  projectDir: string;
}

/** init + notes + ingest 4 images + describe + group + sync-notes. */
export function buildFixtureProject(): Fixture {
  const dir = mkdtempSync(join(tmpdir(), "storyweave-ui-"));
  const projectDir = join(dir, "proj");
  cli(projectDir, "init");
  cli(
    projectDir,
    "notes",
    "--text",
    "The crossing began at dawn. Fog hid the far shore. By midmorning the deck had warmed. We counted gulls until the harbor appeared.",
  );
  const mediaDir = join(dir, "cap");
  execFileSync("mkdir", ["-p", mediaDir]);
  const paths: string[] = [];
  for (let i = 0; i < 4; i++) {
    const p = join(mediaDir, `img_${i}.png`);
    writeFileSync(p, testPng(320, 180, i + 1));
    paths.push(p);
  }
  cli(projectDir, "ingest", ...paths);
  cli(projectDir, "describe");
  cli(projectDir, "group");
  cli(projectDir, "sync-notes");
  return { dir, projectDir };
}

export interface LiveServer {
  baseUrl: string;
  child: ChildProcess;
  stop: () => void;
}

export async function startServer(projectDir: string): Promise<LiveServer> {
  const port = 21000 + Math.floor(Math.random() * 9000);
  const child = spawn(PYTHON, ["-m", "storyweave.cli", "-p", projectDir, "serve", "--port", String(port)], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 20_000;
  for (;;) {
    try {
      const response = await fetch(`${baseUrl}/projects`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      child.kill();
      throw new Error("service never became ready");
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  return { baseUrl, child, stop: () => child.kill() };
}

/** Transport wrapper recording every request the UI issues. */
export interface CapturedRequest {
  method: string;
  url: string;
  body: any;
}

export function capturingTransport(record: CapturedRequest[]): (url: string, init?: RequestInit) => Promise<Response> {
  return (url, init) => {
    record.push({
      method: init?.method ?? "GET",
      url,
      body: init?.body ? JSON.parse(init.body as string) : null,
    });
    return fetch(url, init);
  };
}
