/** DOM wiring for the studio page. All geometry comes from the service. */

import { Client } from "./api.js";
import { legend } from "./colors.js";
import { annotateSource } from "./diagnostics.js";
import { buildPanel, literalFor } from "./panel.js";
import { buildGroup, createRenderer } from "./scene.js";
import { Studio } from "./studio.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8096";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

async function start(): Promise<void> {
  const client = new Client(SERVICE_URL);
  const studio = new Studio(client);

  const canvas = el<HTMLCanvasElement>("viewport");
  const programPane = el<HTMLTextAreaElement>("program");
  const diagnosticsPane = el<HTMLPreElement>("diagnostics");
  const panelPane = el<HTMLDivElement>("panel");
  const legendPane = el<HTMLDivElement>("legend");
  const editRequest = el<HTMLInputElement>("edit-request");
  const editDiff = el<HTMLPreElement>("edit-diff");
  const statusPane = el<HTMLSpanElement>("status");
  const programPicker = el<HTMLSelectElement>("program-picker");
  const meshPicker = el<HTMLSelectElement>("mesh-picker");

  const view = createRenderer(canvas);

  function refresh(): void {
    const snap = studio.snapshot();
    programPane.value = snap.programText;
    view.render(buildGroup(snap.parts));
    statusPane.textContent = `${snap.parts.length} parts`;
    legendPane.replaceChildren(
      ...legend(snap.parts.map((p) => p.fn_name)).map((entry) => {
        const chip = document.createElement("span");
        chip.className = "chip";
        chip.style.background = entry.color;
        chip.textContent = entry.fn;
        return chip;
      }),
    );
    if (snap.diagnostic !== null && snap.rejectedText !== null) {
      diagnosticsPane.textContent = annotateSource(snap.rejectedText, snap.diagnostic);
    } else {
      diagnosticsPane.textContent = snap.flags.length > 0 ? snap.flags.join("\n") : "";
    }
    renderPanel();
  }

  function renderPanel(): void {
    if (studio.library === null || studio.diagnostic !== null) {
      return;
    }
    const fields = buildPanel(studio.library, studio.programText);
    panelPane.replaceChildren(
      ...fields.map((field) => {
        const row = document.createElement("label");
        row.className = "field";
        row.textContent = `${field.fn} #${field.statementIndex} ${field.param.name}`;
        row.title = field.help;
        let input: HTMLInputElement | HTMLSelectElement;
        if (field.param.type === "enum") {
          input = document.createElement("select");
          for (const option of field.param.options ?? []) {
            const opt = document.createElement("option");
            opt.value = option;
            opt.textContent = option;
            opt.selected = field.value === `"${option}"`;
            input.appendChild(opt);
          }
        } else {
          input = document.createElement("input");
          input.value = field.value;
        }
        input.addEventListener("change", () => {
          void studio
            .setParameter(
              field.statementIndex,
              field.argIndex,
              literalFor(field.param, input.value),
            )
            .then(refresh);
        });
        row.appendChild(input);
        return row;
      }),
    );
  }

  programPane.addEventListener("blur", () => {
    void studio.setProgram(programPane.value).then(refresh);
  });

  el<HTMLButtonElement>("edit-send").addEventListener("click", () => {
    void studio.requestEdit(editRequest.value).then((edit) => {
      editDiff.textContent = edit.diff.join("\n");
    });
  });
  el<HTMLButtonElement>("edit-accept").addEventListener("click", () => {
    if (studio.pendingEdit !== null) {
      void studio.acceptEdit().then(() => {
        editDiff.textContent = "";
        refresh();
      });
    }
  });
  el<HTMLButtonElement>("edit-reject").addEventListener("click", () => {
    studio.rejectEdit();
    editDiff.textContent = "";
  });

  el<HTMLButtonElement>("deform-run").addEventListener("click", () => {
    void studio.deformPreview(meshPicker.value).then((result) => {
      statusPane.textContent = `deformed ${result.vertices} vertices -> ${result.mesh}`;
    });
  });

  await studio.load();
  const [programs, shapes] = await Promise.all([client.listPrograms(), client.listShapes()]);
  programPicker.replaceChildren(
    ...Object.keys(programs.programs).map((name) => new Option(name, name)),
  );
  meshPicker.replaceChildren(...shapes.shapes.map((name) => new Option(name, name)));
  programPicker.addEventListener("change", () => {
    void studio.setProgram(programs.programs[programPicker.value]).then(refresh);
  });

  const first = Object.values(programs.programs)[0];
  if (first !== undefined) {
    await studio.setProgram(first);
  }
  refresh();
}

void start();
