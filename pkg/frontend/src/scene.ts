/** three.js scene construction: solid + wireframe boxes, colored by function. */

import * as THREE from "three";

import type { PartView } from "./api.js";
import { colorFor } from "./colors.js";

export interface BoxSpec {
  size: [number, number, number];
  position: [number, number, number];
  color: string;
  statementIndex: number;
  fnName: string;
  label: string;
}

/** Renderer-free description of the boxes for a layout. */
export function layoutBoxes(parts: PartView[]): BoxSpec[] {
  return parts.map((p) => ({
    size: p.dims,
    position: p.center,
    color: colorFor(p.fn_name),
    statementIndex: p.statement_index,
    fnName: p.fn_name,
    label: p.label,
  }));
}

export function buildGroup(parts: PartView[], selected: number | null = null): THREE.Group {
  const group = new THREE.Group();
  for (const spec of layoutBoxes(parts)) {
    const geometry = new THREE.BoxGeometry(...spec.size);
    const material = new THREE.MeshLambertMaterial({
      color: new THREE.Color(spec.color),
      transparent: true,
      opacity: spec.statementIndex === selected ? 0.95 : 0.75,
    });
    const mesh = new THREE.Mesh(geometry, material);
    mesh.position.set(...spec.position);
    mesh.userData = { statementIndex: spec.statementIndex, fnName: spec.fnName };
    group.add(mesh);

    const wire = new THREE.LineSegments(
      new THREE.EdgesGeometry(geometry),
      new THREE.LineBasicMaterial({ color: 0x222222 }),
    );
    wire.position.copy(mesh.position);
    group.add(wire);
  }
  return group;
}

export function createRenderer(canvas: HTMLCanvasElement): {
  render: (group: THREE.Group) => void;
  camera: THREE.PerspectiveCamera;
} {
  const renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
  renderer.setSize(canvas.clientWidth, canvas.clientHeight, false);
  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0xf4f4f4);
  const camera = new THREE.PerspectiveCamera(
    45,
    canvas.clientWidth / canvas.clientHeight,
    0.01,
    100,
  );
  camera.position.set(2.2, 1.6, 2.2);
  camera.lookAt(0, 0, 0);
  scene.add(new THREE.AmbientLight(0xffffff, 0.7));
  const sun = new THREE.DirectionalLight(0xffffff, 0.8);
  sun.position.set(3, 5, 4);
  scene.add(sun);

  let current: THREE.Group | null = null;
  return {
    camera,
    render(group: THREE.Group) {
      if (current !== null) {
        scene.remove(current);
      }
      current = group;
      scene.add(group);
      renderer.render(scene, camera);
    },
  };
}
