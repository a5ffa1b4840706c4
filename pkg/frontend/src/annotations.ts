/**
 * Annotation overlay: vector strokes and text labels drawn over a
 * keyframe.
 *
 * The overlay never touches the underlying asset. Export produces two
 * artifacts with distinct destinations: the flattened raster (sent to the
 * language model for prompt augmentation) and a *reference* to the clean
 * keyframe (what the video model receives).
 */

export interface Stroke {
  points: [number, number][];
  color: [number, number, number];
  width: number;
}

export interface TextLabel {
  position: [number, number];
  text: string;
  color: [number, number, number];
}

export interface FlattenedAnnotation {
  /** PNG bytes of the strokes+labels raster at the keyframe's native size. */
  rasterPng: Uint8Array;
  /** The untouched keyframe the video model must receive. */
  cleanAssetId: string;
  width: number;
  height: number;
}

export class AnnotationOverlay {
  strokes: Stroke[] = [];
  labels: TextLabel[] = [];

  constructor(
    public cleanAssetId: string,
    public width: number,
    public height: number,
  ) {}

  beginStroke(x: number, y: number, color: [number, number, number] = [255, 80, 40], width = 4): Stroke {
    const stroke: Stroke = { points: [[x, y]], color, width };
    this.strokes.push(stroke);
    return stroke;
  }

  extendStroke(stroke: Stroke, x: number, y: number): void {
    stroke.points.push([x, y]);
  }

  addLabel(x: number, y: number, text: string, color: [number, number, number] = [255, 80, 40]): void {
    this.labels.push({ position: [x, y], text, color });
  }

  clear(): void {
    this.strokes = [];
    this.labels = [];
  }

  get isEmpty(): boolean {
    return this.strokes.length === 0 && this.labels.length === 0;
  }

  /** Rasterize at the keyframe's native resolution. */
  flatten(): FlattenedAnnotation {
    const raster = new Rgba(this.width, this.height);
    for (const stroke of this.strokes) {
      for (let i = 1; i < stroke.points.length; i++) {
        raster.line(stroke.points[i - 1], stroke.points[i], stroke.color, stroke.width);
      }
      if (stroke.points.length === 1) {
        raster.dot(stroke.points[0][0], stroke.points[0][1], stroke.color, stroke.width);
      }
    }
    for (const label of this.labels) {
      // labels render as marker boxes; glyph shaping belongs to the browser layer
      raster.box(label.position[0], label.position[1], 6 * Math.max(1, label.text.length), 10, label.color);
    }
    return {
      rasterPng: encodePng(raster),
      cleanAssetId: this.cleanAssetId,
      width: this.width,
      height: this.height,
    };
  }
}

class Rgba {
  data: Uint8Array;

  constructor(
    public width: number,
    public height: number,
  ) {
    this.data = new Uint8Array(width * height * 4);
  }

  dot(x: number, y: number, color: [number, number, number], size: number): void {
    const r = Math.max(1, Math.floor(size / 2));
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++) {
        this.set(Math.round(x + dx), Math.round(y + dy), color);
      }
    }
  }

  line(a: [number, number], b: [number, number], color: [number, number, number], width: number): void {
    let [x0, y0] = [Math.round(a[0]), Math.round(a[1])];
    const [x1, y1] = [Math.round(b[0]), Math.round(b[1])];
    const dx = Math.abs(x1 - x0);
    const dy = -Math.abs(y1 - y0);
    const sx = x0 < x1 ? 1 : -1;
    const sy = y0 < y1 ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.dot(x0, y0, color, width);
      if (x0 === x1 && y0 === y1) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  box(x: number, y: number, w: number, h: number, color: [number, number, number]): void {
    for (let yy = y; yy < y + h; yy++) {
      for (let xx = x; xx < x + w; xx++) {
        this.set(Math.round(xx), Math.round(yy), color);
      }
    }
  }

  private set(x: number, y: number, color: [number, number, number]): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    this.data[i] = color[0];
    this.data[i + 1] = color[1];
    this.data[i + 2] = color[2];
    this.data[i + 3] = 255;
  }
}

// ---------------------------------------------------------------------------
// Dependency-free PNG encoder (RGBA, zlib stream with stored deflate blocks)

export function encodePng(raster: Rgba): Uint8Array {
  const { width, height, data } = raster;
  const stride = width * 4 + 1;
  const raw = new Uint8Array(stride * height);
  for (let y = 0; y < height; y++) {
    raw[y * stride] = 0; // filter: none
    raw.set(data.subarray(y * width * 4, (y + 1) * width * 4), y * stride + 1);
  }

  const ihdr = new Uint8Array(13);
  const view = new DataView(ihdr.buffer);
  view.setUint32(0, width);
  view.setUint32(4, height);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 6; // color type RGBA
  const chunks = [
    pngChunk("IHDR", ihdr),
    pngChunk("IDAT", zlibStored(raw)),
    pngChunk("IEND", new Uint8Array(0)),
  ];
  const signature = new Uint8Array([137, 80, 78, 71, 13, 10, 26, 10]);
  return concat([signature, ...chunks]);
}

function pngChunk(type: string, body: Uint8Array): Uint8Array {
  const out = new Uint8Array(12 + body.length);
  const view = new DataView(out.buffer);
  view.setUint32(0, body.length);
  for (let i = 0; i < 4; i++) out[4 + i] = type.charCodeAt(i);
  out.set(body, 8);
  view.setUint32(8 + body.length, crc32(out.subarray(4, 8 + body.length)));
  return out;
}

/** zlib stream using stored (uncompressed) deflate blocks. */
function zlibStored(data: Uint8Array): Uint8Array {
  const parts: Uint8Array[] = [new Uint8Array([0x78, 0x01])];
  const max = 65_535;
  for (let offset = 0; offset < data.length || data.length === 0; offset += max) {
    const chunk = data.subarray(offset, Math.min(offset + max, data.length));
    const last = offset + max >= data.length ? 1 : 0;
    const header = new Uint8Array(5);
    header[0] = last;
    header[1] = chunk.length & 0xff;
    header[2] = (chunk.length >> 8) & 0xff;
    header[3] = ~chunk.length & 0xff;
    header[4] = (~chunk.length >> 8) & 0xff;
    parts.push(header, chunk);
    if (last) break;
  }
  const adlerBytes = new Uint8Array(4);
  new DataView(adlerBytes.buffer).setUint32(0, adler32(data));
  parts.push(adlerBytes);
  return concat(parts);
}

function concat(parts: Uint8Array[]): Uint8Array {
  const total = parts.reduce((n, p) => n + p.length, 0);
  const out = new Uint8Array(total);
  let offset = 0;
  for (const part of parts) {
    out.set(part, offset);
    offset += part.length;
  }
  return out;
}

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(data: Uint8Array): number {
  let crc = 0xffffffff;
  for (const byte of data) crc = CRC_TABLE[(crc ^ byte) & 0xff] ^ (crc >>> 8);
  return (crc ^ 0xffffffff) >>> 0;
}

function adler32(data: Uint8Array): number {
  let a = 1;
  let b = 0;
  for (const byte of data) {
    a = (a + byte) % 65_521;
    b = (b + a) % 65_521;
  }
  return ((b << 16) | a) >>> 0;
}
