/**
 * Deterministic software rasterizer + PNG encoder for the raster output
 * mode.  No timestamps, no ancillary chunks, fixed deflate settings:
 * identical scenes produce identical bytes.
 */
import { deflateSync } from "node:zlib";

import { GLYPH_H, GLYPH_W, glyphFor } from "./font.js";
import { Item, Scene, TextAnchor } from "./scene.js";

class Framebuffer {
  readonly w: number;
  readonly h: number;
  readonly data: Uint8Array; // RGB

  constructor(w: number, h: number, background: [number, number, number]) {
    this.w = w;
    this.h = h;
    this.data = new Uint8Array(w * h * 3);
    for (let i = 0; i < w * h; i++) {
      this.data[3 * i] = background[0];
      this.data[3 * i + 1] = background[1];
      this.data[3 * i + 2] = background[2];
    }
  }

  set(x: number, y: number, rgb: [number, number, number]): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.w || yi >= this.h) return;
    const k = 3 * (yi * this.w + xi);
    this.data[k] = rgb[0];
    this.data[k + 1] = rgb[1];
    this.data[k + 2] = rgb[2];
  }
}

export function parseColor(hex: string): [number, number, number] {
  const m = /^#([0-9a-fA-F]{6})$/.exec(hex);
  if (!m) throw new Error(`raster: unsupported color ${hex}`);
  const v = parseInt(m[1], 16);
  return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

function fillRect(fb: Framebuffer, x: number, y: number, w: number, h: number,
                  rgb: [number, number, number]): void {
  const x0 = Math.max(0, Math.round(x));
  const y0 = Math.max(0, Math.round(y));
  const x1 = Math.min(fb.w, Math.round(x + w));
  const y1 = Math.min(fb.h, Math.round(y + h));
  for (let yy = y0; yy < y1; yy++) {
    for (let xx = x0; xx < x1; xx++) fb.set(xx, yy, rgb);
  }
}

function strokeRect(fb: Framebuffer, x: number, y: number, w: number, h: number,
                    rgb: [number, number, number]): void {
  drawLine(fb, x, y, x + w, y, rgb, 1, false);
  drawLine(fb, x, y + h, x + w, y + h, rgb, 1, false);
  drawLine(fb, x, y, x, y + h, rgb, 1, false);
  drawLine(fb, x + w, y, x + w, y + h, rgb, 1, false);
}

function drawLine(fb: Framebuffer, x1: number, y1: number, x2: number, y2: number,
                  rgb: [number, number, number], width: number, dash: boolean): void {
  let x = Math.round(x1);
  let y = Math.round(y1);
  const xe = Math.round(x2);
  const ye = Math.round(y2);
  const dx = Math.abs(xe - x);
  const dy = -Math.abs(ye - y);
  const sx = x < xe ? 1 : -1;
  const sy = y < ye ? 1 : -1;
  let err = dx + dy;
  let step = 0;
  for (;;) {
    const on = !dash || step % 9 < 5;
    if (on) {
      fb.set(x, y, rgb);
      if (width > 1) {
        fb.set(x + 1, y, rgb);
        fb.set(x, y + 1, rgb);
      }
    }
    if (x === xe && y === ye) break;
    const e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
    step++;
  }
}

function fillCircle(fb: Framebuffer, cx: number, cy: number, r: number,
                    rgb: [number, number, number]): void {
  const r2 = r * r;
  for (let yy = Math.floor(cy - r); yy <= Math.ceil(cy + r); yy++) {
    for (let xx = Math.floor(cx - r); xx <= Math.ceil(cx + r); xx++) {
      const ddx = xx - cx;
      const ddy = yy - cy;
      if (ddx * ddx + ddy * ddy <= r2) fb.set(xx, yy, rgb);
    }
  }
}

function drawText(fb: Framebuffer, x: number, y: number, text: string, size: number,
                  anchor: TextAnchor, rgb: [number, number, number]): void {
  const scale = Math.max(1, Math.round(size / 8));
  const advance = (GLYPH_W + 1) * scale;
  const total = text.length * advance;
  let x0 = Math.round(x);
  if (anchor === "middle") x0 -= Math.round(total / 2);
  if (anchor === "end") x0 -= total;
  const y0 = Math.round(y) - GLYPH_H * scale; // y is the text baseline
  for (const ch of text) {
    const glyph = glyphFor(ch);
    for (let row = 0; row < GLYPH_H; row++) {
      for (let col = 0; col < GLYPH_W; col++) {
        if ((glyph[row] >> (GLYPH_W - 1 - col)) & 1) {
          fillRect(fb, x0 + col * scale, y0 + row * scale, scale, scale, rgb);
        }
      }
    }
    x0 += advance;
  }
}

function renderItem(fb: Framebuffer, item: Item): void {
  switch (item.kind) {
    case "rect":
      fillRect(fb, item.x, item.y, item.w, item.h, parseColor(item.fill));
      if (item.stroke) strokeRect(fb, item.x, item.y, item.w, item.h, parseColor(item.stroke));
      return;
    case "line":
      drawLine(fb, item.x1, item.y1, item.x2, item.y2, parseColor(item.stroke),
               item.width ?? 1, item.dash ?? false);
      return;
    case "polyline": {
      for (let i = 1; i < item.points.length; i++) {
        drawLine(fb, item.points[i - 1][0], item.points[i - 1][1],
                 item.points[i][0], item.points[i][1], parseColor(item.stroke),
                 item.width ?? 1, item.dash ?? false);
      }
      return;
    }
    case "circle":
      fillCircle(fb, item.cx, item.cy, item.r, parseColor(item.fill));
      return;
    case "cells": {
      for (let i = 0; i < item.colors.length; i++) {
        for (let j = 0; j < item.colors[i].length; j++) {
          fillRect(fb, item.x + j * item.cellW, item.y + i * item.cellH,
                   item.cellW + 1, item.cellH + 1, parseColor(item.colors[i][j]));
        }
      }
      return;
    }
    case "text":
      drawText(fb, item.x, item.y, item.text, item.size ?? 12,
               item.anchor ?? "start", parseColor(item.fill ?? "#222222"));
      return;
  }
}

// ---- PNG encoding ----

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
  let c = 0xffffffff;
  for (let i = 0; i < data.length; i++) {
    c = CRC_TABLE[(c ^ data[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, payload: Uint8Array): Uint8Array {
  const out = new Uint8Array(12 + payload.length);
  const view = new DataView(out.buffer);
  view.setUint32(0, payload.length);
  for (let i = 0; i < 4; i++) out[4 + i] = type.charCodeAt(i);
  out.set(payload, 8);
  const crc = crc32(out.subarray(4, 8 + payload.length));
  view.setUint32(8 + payload.length, crc);
  return out;
}

export function encodePng(w: number, h: number, rgb: Uint8Array): Buffer {
  const ihdr = new Uint8Array(13);
  const iv = new DataView(ihdr.buffer);
  iv.setUint32(0, w);
  iv.setUint32(4, h);
  ihdr[8] = 8;  // bit depth
  ihdr[9] = 2;  // color type: truecolor
  const raw = new Uint8Array(h * (1 + 3 * w));
  for (let y = 0; y < h; y++) {
    raw[y * (1 + 3 * w)] = 0; // filter: none
    raw.set(rgb.subarray(y * 3 * w, (y + 1) * 3 * w), y * (1 + 3 * w) + 1);
  }
  const idat = deflateSync(raw, { level: 9 });
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk("IHDR", ihdr),
    chunk("IDAT", new Uint8Array(idat)),
    chunk("IEND", new Uint8Array(0)),
  ]);
}

export function sceneToPng(scene: Scene): Buffer {
  const fb = new Framebuffer(scene.width, scene.height, parseColor(scene.background));
  for (const item of scene.items) renderItem(fb, item);
  return encodePng(fb.w, fb.h, fb.data);
}
