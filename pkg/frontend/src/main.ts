import { HttpGameService } from "./api.js";
import { GameClient } from "./game.js";
import { GameView } from "./view.js";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}

const service = new HttpGameService("");
const client = new GameClient(service);
const view = new GameView(root, {
  start: (mode, rounds) => void client.start({ mode, rounds }),
  dig: (side) => void client.choose(side),
  continueRun: () => void client.continueToNextRun(),
  dismissError: () => client.dismissError(),
});
client.subscribe((state) => view.render(state));
view.render(client.snapshot());
view.bindKeyboard(document);
