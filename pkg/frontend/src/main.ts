import { ExplorerApi } from "./api.js";
import { ExplorerApp } from "./app.js";

const root = document.querySelector<HTMLElement>("#app");
if (root === null) throw new Error("#app container missing");

const app = new ExplorerApp(root, new ExplorerApi());
void app.start();
