/** Browser entry point: start the app against the real document. */
import { startApp } from "./app.js";
void startApp(document);
