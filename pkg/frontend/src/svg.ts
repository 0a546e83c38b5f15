import { Item, Scene } from "./scene.js";

const fmt = (v: number): string => {
  const r = Math.round(v * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
};

const esc = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

function itemToSvg(item: Item): string {
  switch (item.kind) {
    case "rect": {
      const stroke = item.stroke ? ` stroke="${item.stroke}"` : "";
      return `<rect x="${fmt(item.x)}" y="${fmt(item.y)}" width="${fmt(item.w)}" height="${fmt(item.h)}" fill="${item.fill}"${stroke}/>`;
    }
    case "line": {
      const dash = item.dash ? ` stroke-dasharray="5,4"` : "";
      return `<line x1="${fmt(item.x1)}" y1="${fmt(item.y1)}" x2="${fmt(item.x2)}" y2="${fmt(item.y2)}" stroke="${item.stroke}" stroke-width="${item.width ?? 1}"${dash}/>`;
    }
    case "polyline": {
      const pts = item.points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
      const dash = item.dash ? ` stroke-dasharray="5,4"` : "";
      return `<polyline points="${pts}" fill="none" stroke="${item.stroke}" stroke-width="${item.width ?? 1}"${dash}/>`;
    }
    case "circle":
      return `<circle cx="${fmt(item.cx)}" cy="${fmt(item.cy)}" r="${fmt(item.r)}" fill="${item.fill}"/>`;
    case "cells": {
      const rows: string[] = [];
      for (let i = 0; i < item.colors.length; i++) {
        for (let j = 0; j < item.colors[i].length; j++) {
          const x = item.x + j * item.cellW;
          const y = item.y + i * item.cellH;
          rows.push(
            `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(item.cellW + 0.5)}" height="${fmt(item.cellH + 0.5)}" fill="${item.colors[i][j]}"/>`,
          );
        }
      }
      return rows.join("");
    }
    case "text": {
      const anchor = item.anchor ?? "start";
      const size = item.size ?? 12;
      return `<text x="${fmt(item.x)}" y="${fmt(item.y)}" font-family="monospace" font-size="${size}" text-anchor="${anchor}" fill="${item.fill ?? "#222222"}">${esc(item.text)}</text>`;
    }
  }
}

export function sceneToSvg(scene: Scene): string {
  const body = scene.items.map(itemToSvg).join("\n");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}">\n` +
    `<rect x="0" y="0" width="${scene.width}" height="${scene.height}" fill="${scene.background}"/>\n` +
    body +
    `\n</svg>\n`
  );
}
